#include "respi/simulate.hpp"

#include "respi/dsp.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <random>
#include <thread>

namespace respi {

namespace {

// Seed-stream tags so the per-scene random streams stay independent.
enum SeedStream : std::uint64_t {
    kSourceStream = 1,
    kSurvNoiseStream = 2,
    kRefNoiseStream = 3,
    kPathStreamBase = 16,
};

Eigen::VectorXcd awgn(Eigen::Index n, double power, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v[i] = Complex(re, im);
    }
    return v;
}

// theta_p(n) for one path; zero length for unmodulated paths.
Eigen::VectorXd phase_trajectory(const PathComponent& path, const SceneConfig& cfg,
                                 Eigen::Index n, std::uint64_t path_seed) {
    const double phase_per_meter = 4.0 * std::numbers::pi / cfg.wavelength_m();
    if (std::holds_alternative<BreathingMod>(path.modulation)) {
        const auto& mod = std::get<BreathingMod>(path.modulation);
        const double omega = 2.0 * std::numbers::pi * mod.rate_bpm / 60.0 / cfg.sim_rate_hz;
        Eigen::VectorXd theta(n);
        for (Eigen::Index i = 0; i < n; ++i)
            theta[i] = phase_per_meter * mod.displacement_m *
                       std::sin(omega * static_cast<double>(i) + mod.phase0);
        return theta;
    }
    if (std::holds_alternative<RandomMotionMod>(path.modulation)) {
        const auto& mod = std::get<RandomMotionMod>(path.modulation);
        std::mt19937_64 rng(path_seed);
        std::normal_distribution<double> step(0.0, mod.step_sigma_m);
        Eigen::VectorXd theta(n);
        double displacement = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            displacement += step(rng);
            theta[i] = phase_per_meter * displacement;
        }
        return theta;
    }
    return {};
}

double path_power(const PathComponent& p) { return p.amplitude * p.amplitude; }

}  // namespace

void SceneConfig::validate() const {
    if (paths.empty()) throw std::invalid_argument("scene: at least one path required");
    if (!(duration_s > 0.0)) throw std::invalid_argument("scene: duration must be > 0");
    if (!(sim_rate_hz >= 400.0)) throw std::invalid_argument("scene: sim rate must be >= 400 Hz");
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("scene: carrier must be > 0");
    for (const auto& p : paths) {
        if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude))
            throw std::invalid_argument("scene: path amplitude must be finite and >= 0");
        if (p.delay_samples < 0) throw std::invalid_argument("scene: path delay must be >= 0");
        if (const auto* b = std::get_if<BreathingMod>(&p.modulation)) {
            if (b->rate_bpm < kMinRateBpm || b->rate_bpm > kMaxRateBpm)
                throw std::invalid_argument("scene: breathing rate outside [10, 30] bpm");
            if (!(b->displacement_m > 0.0))
                throw std::invalid_argument("scene: breathing displacement must be > 0");
        }
    }
}

ComplexSeries gen_source(Eigen::Index n_samples, std::uint64_t seed, double sample_rate_hz) {
    if (n_samples < 0) throw std::invalid_argument("gen_source: negative sample count");
    static const double amp = 1.0 / std::sqrt(2.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> sym(0, 3);
    ComplexSeries out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(n_samples);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        const int s = sym(rng);
        out.samples[i] = Complex(s & 1 ? amp : -amp, s & 2 ? amp : -amp);
    }
    return out;
}

ScenePair synth_scene(const SceneConfig& cfg) {
    cfg.validate();
    const Eigen::Index n =
        static_cast<Eigen::Index>(std::llround(cfg.duration_s * cfg.sim_rate_hz));
    const ComplexSeries source =
        gen_source(n, derive_seed(cfg.seed, kSourceStream), cfg.sim_rate_hz);

    ScenePair scene;
    scene.reference.sample_rate_hz = cfg.sim_rate_hz;
    scene.surveillance.sample_rate_hz = cfg.sim_rate_hz;
    scene.reference.samples = source.samples;
    scene.surveillance.samples = Eigen::VectorXcd::Zero(n);

    for (std::size_t p = 0; p < cfg.paths.size(); ++p) {
        const auto& path = cfg.paths[p];
        const Eigen::VectorXd theta =
            phase_trajectory(path, cfg, n, derive_seed(cfg.seed, kPathStreamBase + p));
        const Eigen::Index tau = path.delay_samples;
        for (Eigen::Index i = tau; i < n; ++i) {
            Complex term = path.amplitude * source.samples[i - tau];
            if (theta.size() > 0) term *= std::polar(1.0, theta[i]);
            scene.surveillance.samples[i] += term;
        }
    }

    // Noise anchored to the target echo (first non-direct path); for a lone
    // direct path the anchor falls back to the direct path itself. The
    // reference channel is 20 dB cleaner than the surveillance channel.
    if (std::isfinite(cfg.snr_db)) {
        const double anchor =
            cfg.paths.size() > 1 ? path_power(cfg.paths[1]) : path_power(cfg.paths[0]);
        const double noise_power = anchor * std::pow(10.0, -cfg.snr_db / 10.0);
        std::mt19937_64 surv_rng(derive_seed(cfg.seed, kSurvNoiseStream));
        scene.surveillance.samples += awgn(n, noise_power, surv_rng);

        const double ref_noise_power = std::pow(10.0, -(cfg.snr_db + 20.0) / 10.0);
        std::mt19937_64 ref_rng(derive_seed(cfg.seed, kRefNoiseStream));
        scene.reference.samples += awgn(n, ref_noise_power, ref_rng);
    }

    scene.label.cls = ActivityClass::Static;
    for (std::size_t p = 1; p < cfg.paths.size(); ++p) {
        if (const auto* b = std::get_if<BreathingMod>(&cfg.paths[p].modulation)) {
            scene.label.cls = ActivityClass::Breathing;
            scene.label.rate_bpm = static_cast<int>(std::lround(b->rate_bpm));
            break;
        }
        if (std::holds_alternative<RandomMotionMod>(cfg.paths[p].modulation))
            scene.label.cls = ActivityClass::RandomMotion;
    }
    return scene;
}

SceneConfig scene_for_class(const DatasetGenConfig& cfg, ActivityClass cls, int rate_bpm,
                            double phase0, std::uint64_t scene_seed) {
    SceneConfig scene;
    scene.carrier_hz = cfg.carrier_hz;
    scene.sim_rate_hz = cfg.sim_rate_hz();
    scene.duration_s = cfg.window_seconds + cfg.warmup_seconds;
    scene.snr_db = cfg.snr_db;
    scene.seed = scene_seed;

    PathComponent direct{.amplitude = cfg.direct_amplitude,
                         .delay_samples = cfg.direct_delay,
                         .modulation = {}};
    PathComponent echo{.amplitude = cfg.echo_amplitude,
                       .delay_samples = cfg.echo_delay,
                       .modulation = {}};
    switch (cls) {
        case ActivityClass::Breathing:
            echo.modulation = BreathingMod{.rate_bpm = static_cast<double>(rate_bpm),
                                           .displacement_m = cfg.breathing_displacement_m,
                                           .phase0 = phase0};
            break;
        case ActivityClass::RandomMotion:
            echo.modulation = RandomMotionMod{.step_sigma_m = cfg.random_step_sigma_m};
            break;
        case ActivityClass::Static:
            break;
    }
    scene.paths = {direct, echo};
    return scene;
}

GeneratedDataset gen_dataset(const DatasetGenConfig& cfg, const std::filesystem::path& out_base) {
    if (cfg.per_class < 1) throw std::invalid_argument("gen_dataset: per_class must be >= 1");
    if (cfg.classes.empty()) throw std::invalid_argument("gen_dataset: no classes requested");
    if (!(cfg.label_fraction >= 0.0 && cfg.label_fraction <= 1.0))
        throw std::invalid_argument("gen_dataset: label_fraction must lie in [0, 1]");

    const Eigen::Index out_window = cfg.window_samples();
    const int total = cfg.per_class * static_cast<int>(cfg.classes.size());
    const int labeled_per_class =
        static_cast<int>(std::llround(cfg.label_fraction * cfg.per_class));

    struct WindowSet {
        LabeledWindow primary;  // error window, or surveillance in raw mode
        LabeledWindow ref;      // raw mode only
    };

    auto build_window = [&](int global_index) -> WindowSet {
        const int class_idx = global_index / cfg.per_class;
        const int within = global_index % cfg.per_class;
        const ActivityClass cls = cfg.classes[static_cast<std::size_t>(class_idx)];
        const std::uint64_t scene_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(global_index));

        // Per-window draw of rate and initial breathing phase.
        std::mt19937_64 rng(derive_seed(scene_seed, 0xA11));
        std::uniform_int_distribution<int> rate_dist(kMinRateBpm, kMaxRateBpm);
        std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
        const int rate = rate_dist(rng);
        const double phase0 = phase_dist(rng);

        const SceneConfig scene_cfg = scene_for_class(cfg, cls, rate, phase0, scene_seed);
        const ScenePair scene = synth_scene(scene_cfg);
        const ComplexSeries ref = decimate(scene.reference, cfg.decim_factor);
        const ComplexSeries surv = decimate(scene.surveillance, cfg.decim_factor);

        ActivityLabel label = scene.label;
        if (label.cls == ActivityClass::Breathing && within >= labeled_per_class)
            label.rate_bpm.reset();

        char source_id[64];
        std::snprintf(source_id, sizeof source_id, "sim:%s:%04d", to_string(cls), within);

        auto to_window = [&](const Eigen::VectorXcd& samples, Eigen::Index keep_tail,
                             const std::string& id) {
            LabeledWindow w;
            const auto block = samples.tail(std::min(keep_tail, samples.size()));
            w.iq.resize(2, block.size());
            w.iq.row(0) = block.real().transpose().cast<float>();
            w.iq.row(1) = block.imag().transpose().cast<float>();
            w.label = label;
            w.source_id = id;
            return w;
        };

        WindowSet out;
        if (cfg.raw) {
            // Raw pairs keep the warmup span so a later cancel run can settle.
            out.primary = to_window(surv.samples, surv.samples.size(), source_id);
            out.ref = to_window(ref.samples, ref.samples.size(), std::string(source_id) + ":ref");
        } else {
            const ComplexSeries error = cancel(ref, surv, cfg.canceller);
            out.primary = to_window(error.samples, out_window, source_id);
        }
        return out;
    };

    // Deterministic parallel generation: per-window seeds plus index-ordered
    // assembly make the result independent of scheduling.
    std::vector<WindowSet> sets(static_cast<std::size_t>(total));
    const unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (unsigned t = 0; t < n_threads; ++t) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                sets[static_cast<std::size_t>(i)] = build_window(i);
        }));
    }
    for (auto& f : futures) f.get();

    DatasetMeta meta{.sample_rate_hz = cfg.out_rate_hz,
                     .window_seconds = cfg.raw ? cfg.window_seconds + cfg.warmup_seconds
                                               : cfg.window_seconds,
                     .seed = cfg.seed};

    GeneratedDataset result;
    std::vector<LabeledWindow> primary;
    primary.reserve(sets.size());
    for (auto& s : sets) primary.push_back(std::move(s.primary));

    if (cfg.raw) {
        std::vector<LabeledWindow> refs;
        refs.reserve(sets.size());
        for (auto& s : sets) refs.push_back(std::move(s.ref));
        result.manifest = write_dataset(primary, meta, out_base.string() + "_surv");
        result.raw_ref = write_dataset(refs, meta, out_base.string() + "_ref");
    } else {
        result.manifest = write_dataset(primary, meta, out_base);
    }
    return result;
}

}  // namespace respi
