#ifndef RESPI_SIMULATE_HPP
#define RESPI_SIMULATE_HPP

#include "respi/cancel.hpp"
#include "respi/dataset.hpp"
#include "respi/types.hpp"

#include <cmath>
#include <variant>

namespace respi {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Sinusoidal chest displacement: phase trajectory
/// theta(n) = (4 pi / lambda) * displacement * sin(2 pi rate_bpm/60 * t + phase0).
struct BreathingMod {
    double rate_bpm = 15.0;
    double displacement_m = 0.01;
    double phase0 = 0.0;
};

/// Gaussian random-walk displacement with the given per-sample step, scaled
/// to phase by 4 pi / lambda.
struct RandomMotionMod {
    double step_sigma_m = 0.002;
};

using PathModulation = std::variant<std::monostate, BreathingMod, RandomMotionMod>;

/// One propagation path of the surveillance channel: amplitude, integer
/// sample delay, and an optional phase modulation from target motion.
struct PathComponent {
    double amplitude = 1.0;
    int delay_samples = 0;
    PathModulation modulation;
};

struct SceneConfig {
    std::vector<PathComponent> paths;  // first path is the direct echo
    double carrier_hz = 2.412e9;       // WiFi channel 1
    double sim_rate_hz = 4000.0;
    double duration_s = 10.0;
    /// Surveillance noise level relative to the first non-direct path (the
    /// target echo); for a lone direct path it is relative to that path.
    /// +infinity disables noise on both channels.
    double snr_db = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
};

struct ScenePair {
    ComplexSeries reference;
    ComplexSeries surveillance;
    ActivityLabel label;
};

/// I.i.d. QPSK symbols {(+-1 +- j)/sqrt(2)}, unit average power,
/// deterministic for a fixed seed.
ComplexSeries gen_source(Eigen::Index n_samples, std::uint64_t seed, double sample_rate_hz);

/// Synthesizes one reference/surveillance pair per the discrete-path model:
/// surveillance = sum_p A_p x[n - tau_p] exp(j theta_p(n)) + AWGN, reference
/// = x[n] plus noise 20 dB below the surveillance noise level. The label is
/// derived from the modulations on the non-direct paths.
ScenePair synth_scene(const SceneConfig& cfg);

/// Per-class scene construction defaults for dataset generation; values are
/// tunable knobs, not asserted truths.
struct DatasetGenConfig {
    int per_class = 480;
    std::vector<ActivityClass> classes = {ActivityClass::Breathing, ActivityClass::Static,
                                          ActivityClass::RandomMotion};
    double label_fraction = 1.0;  // fraction of breathing windows keeping a rate label
    bool raw = false;             // store pre-cancellation pairs instead of error windows

    double window_seconds = 10.0;
    double out_rate_hz = 400.0;
    int decim_factor = 10;       // sim rate = out_rate * decim_factor
    double warmup_seconds = 4.0; // extra leading signal so the canceller settles

    double snr_db = 20.0;
    double carrier_hz = 2.412e9;
    double direct_amplitude = 1.0;
    int direct_delay = 0;
    double echo_amplitude = 0.1;
    int echo_delay = 12;  // at sim rate
    double breathing_displacement_m = 0.01;
    double random_step_sigma_m = 0.002;

    LmsConfig canceller{.taps = 32, .mu = 0.1, .algo = LmsAlgo::Nlms, .eps = 1e-8};

    std::uint64_t seed = 0;

    double sim_rate_hz() const { return out_rate_hz * decim_factor; }
    Eigen::Index window_samples() const {
        return static_cast<Eigen::Index>(std::llround(window_seconds * out_rate_hz));
    }
};

struct GeneratedDataset {
    DatasetManifest manifest;                 // the dataset that downstream stages consume
    std::optional<DatasetManifest> raw_ref;   // only with cfg.raw
};

/// Builds per_class windows for each requested activity and writes them under
/// `out_base`. Default mode stores cancelled error-signal windows as
/// `<out_base>.iqd/.json`; raw mode stores the pre-cancellation pair as
/// `<out_base>_ref` and `<out_base>_surv`. Windows are generated from
/// per-window derived seeds, so the output is identical regardless of
/// evaluation order.
GeneratedDataset gen_dataset(const DatasetGenConfig& cfg, const std::filesystem::path& out_base);

/// Scene assembly used by gen_dataset, exposed for tests: builds the scene
/// config for one window of the given class.
SceneConfig scene_for_class(const DatasetGenConfig& cfg, ActivityClass cls, int rate_bpm,
                            double phase0, std::uint64_t scene_seed);

}  // namespace respi

#endif  // RESPI_SIMULATE_HPP
