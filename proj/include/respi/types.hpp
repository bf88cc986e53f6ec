#ifndef RESPI_TYPES_HPP
#define RESPI_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace respi {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

/// Uniformly sampled complex baseband signal.
struct ComplexSeries {
    Eigen::VectorXcd samples;
    double sample_rate_hz = 0.0;

    Eigen::Index size() const { return samples.size(); }
};

enum class ActivityClass { Breathing = 0, Static = 1, RandomMotion = 2 };

inline const char* to_string(ActivityClass c) {
    switch (c) {
        case ActivityClass::Breathing: return "breathing";
        case ActivityClass::Static: return "static";
        case ActivityClass::RandomMotion: return "random_motion";
    }
    return "?";
}

ActivityClass activity_from_string(const std::string& s);

/// Activity tag for one window. rate_bpm is only meaningful for Breathing
/// windows and may be absent even then (partially labeled data).
struct ActivityLabel {
    ActivityClass cls = ActivityClass::Static;
    std::optional<int> rate_bpm;

    bool operator==(const ActivityLabel&) const = default;
};

constexpr int kMinRateBpm = 10;
constexpr int kMaxRateBpm = 30;

/// One segmented I/Q window: row 0 = in-phase, row 1 = quadrature.
/// Stored as float32 to match the on-disk payload.
struct LabeledWindow {
    Eigen::Matrix<float, 2, Eigen::Dynamic> iq;
    ActivityLabel label;
    std::string source_id;

    Eigen::Index samples() const { return iq.cols(); }
};

/// Converts a window back to the complex series it was sliced from.
Eigen::VectorXcd window_to_complex(const LabeledWindow& w);

/// Rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
    Eigen::MatrixXi counts;
    std::vector<std::string> class_names;

    explicit ConfusionMatrix(std::vector<std::string> names)
        : counts(Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(names.size()),
                                       static_cast<Eigen::Index>(names.size()))),
          class_names(std::move(names)) {}

    void add(int true_class, int predicted_class) { counts(true_class, predicted_class) += 1; }
    long total() const { return counts.sum(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
};

// Error taxonomy. File-format problems and integrity failures are distinct so
// the CLI can map them to stable exit codes.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::int64_t step)
        : std::runtime_error(what), step_index(step) {}
    std::int64_t step_index;
};

/// Splitmix64-style mixing; derives independent per-item seeds from a base
/// seed and an item index so parallel generation is schedule-independent.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base ^ (index + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace respi

#endif  // RESPI_TYPES_HPP
