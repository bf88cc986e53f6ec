#include "respi/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <random>

namespace respi {

namespace {

constexpr char kMagic[4] = {'I', 'Q', 'D', 'W'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "dataset payload I/O assumes a little-endian host");

std::filesystem::path strip_known_extension(std::filesystem::path p) {
    const auto ext = p.extension().string();
    if (ext == ".iqd" || ext == ".json") p.replace_extension();
    return p;
}

void append_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

nlohmann::ordered_json label_to_json(const ActivityLabel& label) {
    nlohmann::ordered_json j;
    j["class"] = to_string(label.cls);
    if (label.rate_bpm) j["rate_bpm"] = *label.rate_bpm;
    return j;
}

ActivityLabel label_from_json(const nlohmann::json& j) {
    ActivityLabel label;
    label.cls = activity_from_string(j.at("class").get<std::string>());
    if (j.contains("rate_bpm")) {
        const int rate = j.at("rate_bpm").get<int>();
        if (label.cls != ActivityClass::Breathing)
            throw FormatError("manifest: rate_bpm on a non-breathing window");
        if (rate < kMinRateBpm || rate > kMaxRateBpm)
            throw FormatError("manifest: rate_bpm out of range [10, 30]");
        label.rate_bpm = rate;
    }
    return label;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

DatasetManifest write_dataset(const std::vector<LabeledWindow>& windows, const DatasetMeta& meta,
                              const std::filesystem::path& base_path) {
    const auto base = strip_known_extension(base_path);

    const Eigen::Index R = windows.empty() ? 0 : windows.front().samples();
    for (const auto& w : windows) {
        if (w.samples() != R)
            throw std::invalid_argument("write_dataset: windows must share one length");
        if (!w.iq.allFinite())
            throw std::invalid_argument("write_dataset: non-finite sample in window");
    }

    DatasetManifest manifest;
    manifest.version = static_cast<int>(kVersion);
    manifest.sample_rate_hz = meta.sample_rate_hz;
    manifest.window_seconds = meta.window_seconds;
    manifest.seed = meta.seed;

    std::string payload;
    payload.reserve(8 + windows.size() * static_cast<std::size_t>(R) * 2 * sizeof(float));
    payload.append(kMagic, 4);
    append_u32(payload, kVersion);

    for (const auto& w : windows) {
        DatasetManifest::Entry entry;
        entry.offset = payload.size();
        entry.samples = R;
        entry.label = w.label;
        entry.source_id = w.source_id;
        manifest.windows.push_back(std::move(entry));

        // Row-major 2xR block: the full I row, then the full Q row. iq is
        // column-major, so rows are staged through a contiguous buffer.
        for (int row = 0; row < 2; ++row) {
            const Eigen::RowVectorXf contiguous = w.iq.row(row);
            payload.append(reinterpret_cast<const char*>(contiguous.data()),
                           static_cast<std::size_t>(R) * sizeof(float));
        }
    }

    nlohmann::ordered_json j;
    j["version"] = manifest.version;
    j["sample_rate_hz"] = manifest.sample_rate_hz;
    j["window_seconds"] = manifest.window_seconds;
    j["seed"] = manifest.seed;
    j["windows"] = nlohmann::ordered_json::array();
    for (const auto& e : manifest.windows) {
        nlohmann::ordered_json w;
        w["offset"] = e.offset;
        w["samples"] = e.samples;
        w["label"] = label_to_json(e.label);
        w["source_id"] = e.source_id;
        j["windows"].push_back(std::move(w));
    }

    write_file_atomic(base.string() + ".iqd", payload);
    write_file_atomic(base.string() + ".json", j.dump(2) + "\n");
    return manifest;
}

Dataset read_dataset(const std::filesystem::path& path) {
    const auto base = strip_known_extension(path);
    const auto payload_path = base.string() + ".iqd";
    const auto manifest_path = base.string() + ".json";

    std::ifstream manifest_in(manifest_path);
    if (!manifest_in) throw IoError("cannot open manifest: " + manifest_path);
    nlohmann::json j;
    try {
        manifest_in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest parse error: " + std::string(e.what()));
    }

    std::ifstream payload(payload_path, std::ios::binary);
    if (!payload) throw IoError("cannot open payload: " + payload_path);
    payload.seekg(0, std::ios::end);
    const std::uint64_t file_size = static_cast<std::uint64_t>(payload.tellg());
    payload.seekg(0);

    char magic[4] = {};
    std::uint32_t version = 0;
    if (file_size < 8 || !payload.read(magic, 4) ||
        !payload.read(reinterpret_cast<char*>(&version), 4))
        throw FormatError("payload too short for header: " + payload_path);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad payload magic (expected IQDW): " + payload_path);
    if (version != kVersion)
        throw FormatError("unsupported payload version " + std::to_string(version));

    Dataset ds;
    try {
        ds.manifest.version = j.at("version").get<int>();
        ds.manifest.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        ds.manifest.window_seconds = j.at("window_seconds").get<double>();
        ds.manifest.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& w : j.at("windows")) {
            DatasetManifest::Entry e;
            e.offset = w.at("offset").get<std::uint64_t>();
            e.samples = w.at("samples").get<std::int64_t>();
            e.label = label_from_json(w.at("label"));
            e.source_id = w.value("source_id", std::string{});
            ds.manifest.windows.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest field error: " + std::string(e.what()));
    }
    if (ds.manifest.version != static_cast<int>(kVersion))
        throw FormatError("unsupported manifest version");

    std::uint64_t expected_end = 8;
    std::int64_t R = ds.manifest.windows.empty() ? 0 : ds.manifest.windows.front().samples;
    for (const auto& e : ds.manifest.windows) {
        if (e.samples != R) throw FormatError("manifest: window lengths are not uniform");
        if (e.samples <= 0) throw FormatError("manifest: non-positive window length");
        if (e.offset != expected_end)
            throw IntegrityError("manifest: window offsets overlap or leave gaps");
        expected_end = e.offset + static_cast<std::uint64_t>(e.samples) * 2 * sizeof(float);
    }
    if (expected_end != file_size)
        throw IntegrityError("payload size mismatch: manifest expects " +
                             std::to_string(expected_end) + " bytes, file has " +
                             std::to_string(file_size));

    ds.windows.reserve(ds.manifest.windows.size());
    for (const auto& e : ds.manifest.windows) {
        LabeledWindow w;
        w.iq.resize(2, e.samples);
        w.label = e.label;
        w.source_id = e.source_id;
        payload.seekg(static_cast<std::streamoff>(e.offset));
        Eigen::RowVectorXf contiguous(e.samples);
        for (int row = 0; row < 2; ++row) {
            if (!payload.read(reinterpret_cast<char*>(contiguous.data()),
                              e.samples * static_cast<std::int64_t>(sizeof(float))))
                throw IntegrityError("payload read failed inside window block");
            w.iq.row(row) = contiguous;
        }
        ds.windows.push_back(std::move(w));
    }
    return ds;
}

SplitIndices split_dataset(const std::vector<LabeledWindow>& windows, double val_fraction,
                           std::uint64_t seed) {
    if (!(val_fraction >= 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("split_dataset: val_fraction must lie in [0, 1)");

    std::map<std::pair<int, int>, std::vector<int>> strata;
    for (int i = 0; i < static_cast<int>(windows.size()); ++i) {
        const auto& label = windows[static_cast<std::size_t>(i)].label;
        strata[{static_cast<int>(label.cls), label.rate_bpm.value_or(-1)}].push_back(i);
    }

    SplitIndices split;
    std::uint64_t stratum_index = 0;
    for (auto& [key, indices] : strata) {
        std::mt19937_64 rng(derive_seed(seed, 0x51000000ULL + stratum_index++));
        std::shuffle(indices.begin(), indices.end(), rng);
        const auto n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(indices.size())));
        for (std::size_t k = 0; k < indices.size(); ++k)
            (k < n_val ? split.val : split.train).push_back(indices[k]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    return split;
}

}  // namespace respi
