#include "respi/cnn.hpp"

#include <cstring>
#include <fstream>

namespace respi::cnn {

LayerSpec LayerSpec::conv(int depth, int kernel_len, double dropout) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.depth = depth;
    s.kernel_len = kernel_len;
    s.dropout_p = dropout;
    return s;
}

LayerSpec LayerSpec::maxpool(int pool_len, double dropout) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.pool_len = pool_len;
    s.dropout_p = dropout;
    return s;
}

LayerSpec LayerSpec::dense(int units, double dropout) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    s.dropout_p = dropout;
    return s;
}

LayerSpec LayerSpec::softmax(int classes) {
    LayerSpec s;
    s.kind = LayerKind::Softmax;
    s.classes = classes;
    return s;
}

std::vector<LayerSpec> default_arch(int classes, int depth, int kernel_len, int dense_units,
                                    double dropout) {
    return {
        LayerSpec::conv(depth, kernel_len),
        LayerSpec::maxpool(2, dropout),
        LayerSpec::conv(depth, kernel_len),
        LayerSpec::maxpool(2, dropout),
        LayerSpec::dense(dense_units, dropout),
        LayerSpec::softmax(classes),
    };
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw IntegrityError("model file truncated");
    return v;
}

void put_floats(std::string& out, const float* data, std::size_t n) {
    out.append(reinterpret_cast<const char*>(data), n * sizeof(float));
}

void get_floats(std::istream& in, float* data, std::size_t n) {
    if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float))))
        throw IntegrityError("model file truncated inside weight blob");
}

}  // namespace

void save_model(const CnnModel<float>& model, const std::filesystem::path& path) {
    std::string bytes;
    bytes.append(kMagic, 4);
    put<std::uint32_t>(bytes, kVersion);
    put<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.input_len));
    put<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.class_names.size()));
    for (const auto& name : model.class_names) {
        put<std::uint32_t>(bytes, static_cast<std::uint32_t>(name.size()));
        bytes.append(name);
    }
    put<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.arch.size()));
    for (const auto& spec : model.arch) {
        put<std::uint32_t>(bytes, static_cast<std::uint32_t>(spec.kind));
        put<std::int32_t>(bytes, spec.depth);
        put<std::int32_t>(bytes, spec.kernel_len);
        put<std::int32_t>(bytes, spec.pool_len);
        put<std::int32_t>(bytes, spec.units);
        put<std::int32_t>(bytes, spec.classes);
        put<double>(bytes, spec.dropout_p);
    }
    for (const auto& layer : model.layers) {
        if (const auto* conv = std::get_if<CnnModel<float>::ConvLayer>(&layer)) {
            for (const auto& k : conv->kernels)
                put_floats(bytes, k.data(), static_cast<std::size_t>(k.size()));
            put_floats(bytes, conv->bias.data(), static_cast<std::size_t>(conv->bias.size()));
        } else if (const auto* dense = std::get_if<CnnModel<float>::DenseLayer>(&layer)) {
            put_floats(bytes, dense->weights.data(),
                       static_cast<std::size_t>(dense->weights.size()));
            put_floats(bytes, dense->bias.data(), static_cast<std::size_t>(dense->bias.size()));
        }
    }
    write_file_atomic(path, bytes);
}

CnnModel<float> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());

    char magic[4] = {};
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad model magic (expected RSPC): " + path.string());
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion)
        throw FormatError("unsupported model version " + std::to_string(version));

    const auto input_len = static_cast<int>(get<std::uint32_t>(in));
    const auto n_classes = get<std::uint32_t>(in);
    if (n_classes < 2 || n_classes > 1024) throw FormatError("implausible class count");
    std::vector<std::string> names;
    for (std::uint32_t i = 0; i < n_classes; ++i) {
        const auto len = get<std::uint32_t>(in);
        if (len > 4096) throw FormatError("implausible class name length");
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw IntegrityError("model file truncated in names");
        names.push_back(std::move(name));
    }

    const auto n_layers = get<std::uint32_t>(in);
    if (n_layers == 0 || n_layers > 256) throw FormatError("implausible layer count");
    std::vector<LayerSpec> arch;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec spec;
        const auto kind = get<std::uint32_t>(in);
        if (kind > 3) throw FormatError("unknown layer kind in model file");
        spec.kind = static_cast<LayerKind>(kind);
        spec.depth = get<std::int32_t>(in);
        spec.kernel_len = get<std::int32_t>(in);
        spec.pool_len = get<std::int32_t>(in);
        spec.units = get<std::int32_t>(in);
        spec.classes = get<std::int32_t>(in);
        spec.dropout_p = get<double>(in);
        arch.push_back(spec);
    }

    CnnModel<float> model;
    try {
        model = build_model<float>(arch, input_len, names, 0);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("model architecture invalid: ") + e.what());
    }
    for (auto& layer : model.layers) {
        if (auto* conv = std::get_if<CnnModel<float>::ConvLayer>(&layer)) {
            for (auto& k : conv->kernels)
                get_floats(in, k.data(), static_cast<std::size_t>(k.size()));
            get_floats(in, conv->bias.data(), static_cast<std::size_t>(conv->bias.size()));
        } else if (auto* dense = std::get_if<CnnModel<float>::DenseLayer>(&layer)) {
            get_floats(in, dense->weights.data(),
                       static_cast<std::size_t>(dense->weights.size()));
            get_floats(in, dense->bias.data(), static_cast<std::size_t>(dense->bias.size()));
        }
    }
    in.peek();
    if (!in.eof()) throw IntegrityError("model file has trailing bytes");
    return model;
}

}  // namespace respi::cnn
