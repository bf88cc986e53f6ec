#ifndef RESPI_DATASET_HPP
#define RESPI_DATASET_HPP

#include "respi/types.hpp"

#include <filesystem>

namespace respi {

/// Sidecar description of an .iqd payload. Offsets are byte positions of each
/// window block inside the payload file.
struct DatasetManifest {
    struct Entry {
        std::uint64_t offset = 0;
        std::int64_t samples = 0;
        ActivityLabel label;
        std::string source_id;
    };

    int version = 1;
    double sample_rate_hz = 0.0;
    double window_seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<Entry> windows;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<LabeledWindow> windows;
};

struct DatasetMeta {
    double sample_rate_hz = 400.0;
    double window_seconds = 10.0;
    std::uint64_t seed = 0;
};

/// Writes `<base>.iqd` (magic "IQDW", u32 version, float32 LE window blocks,
/// I row then Q row per window) plus a `<base>.json` manifest. All windows
/// must share one length. Both files are written atomically.
DatasetManifest write_dataset(const std::vector<LabeledWindow>& windows, const DatasetMeta& meta,
                              const std::filesystem::path& base_path);

/// Reads a dataset pair; `path` may be the base path or either file of the
/// pair. Throws FormatError on bad magic/version/content and IntegrityError
/// when the manifest disagrees with the payload size or offsets overlap.
Dataset read_dataset(const std::filesystem::path& path);

/// Deterministic stratified train/validation split. Strata are (class,
/// rate_bpm) pairs; within each stratum a seeded shuffle assigns
/// round(fraction * n) indices to the validation side.
struct SplitIndices {
    std::vector<int> train;
    std::vector<int> val;
};

SplitIndices split_dataset(const std::vector<LabeledWindow>& windows, double val_fraction,
                           std::uint64_t seed);

/// Writes bytes to `path` via a temporary file plus rename so readers never
/// observe a truncated file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace respi

#endif  // RESPI_DATASET_HPP
