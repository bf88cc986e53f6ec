// respisense: synthetic passive-WiFi respiration sensing pipeline.
// Subcommands: simulate | cancel | train | eval | sweep | rate.

#include "respi/cancel.hpp"
#include "respi/cnn.hpp"
#include "respi/dataset.hpp"
#include "respi/dsp.hpp"
#include "respi/forest.hpp"
#include "respi/metrics.hpp"
#include "respi/report.hpp"
#include "respi/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace respi;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitContract = 3;

struct CommonFlags {
    std::string out = ".";
    std::uint64_t seed = 42;
    bool deterministic = true;
};

void add_common(CLI::App* cmd, CommonFlags& common) {
    cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", common.seed, "Global seed")->capture_default_str();
    cmd->add_flag("--deterministic,!--no-deterministic", common.deterministic,
                  "Fixed-order reductions (the pipeline is deterministic by construction; "
                  "retained as an interface knob)");
    // Handled before parsing (see apply_config_file); registered for help.
    cmd->add_option("--config", "Flat key = value config file; flags override it");
}

// Flat `key = value` config support: entries become `--key=value` arguments
// appended after the user's own flags, skipping keys the user already set so
// the command line always wins. Unknown keys surface as usage errors.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file: " + config_path);
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config file: expected 'key = value', got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw IoError("config file: empty key in line: " + line);

        const std::string flag = "--" + key;
        bool overridden = false;
        for (const auto& a : args)
            overridden |= a == flag || a.rfind(flag + "=", 0) == 0;
        if (!overridden) args.push_back(flag + "=" + value);
    }
    return args;
}

std::vector<ActivityClass> parse_classes(const std::string& csv) {
    std::vector<ActivityClass> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "breathing") out.push_back(ActivityClass::Breathing);
        else if (item == "static") out.push_back(ActivityClass::Static);
        else if (item == "random" || item == "random_motion")
            out.push_back(ActivityClass::RandomMotion);
        else throw CLI::ValidationError("--classes", "unknown class: " + item);
    }
    if (out.empty()) throw CLI::ValidationError("--classes", "no classes given");
    return out;
}

std::vector<int> selected_indices(const Dataset& ds, const std::string& split,
                                  double val_fraction, std::uint64_t seed) {
    std::vector<int> idx;
    if (split == "all") {
        idx.resize(ds.windows.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        return idx;
    }
    const SplitIndices s = split_dataset(ds.windows, val_fraction, seed);
    if (split == "val") return s.val;
    if (split == "train") return s.train;
    throw std::invalid_argument("unknown split: " + split);
}

std::vector<std::string> split_comments(const std::string& split, double val_fraction,
                                        std::uint64_t seed) {
    return {"split=" + split, "val_fraction=" + format_double(val_fraction),
            "seed=" + std::to_string(seed), "split_method=stratified"};
}

bool is_cnn_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    return std::string_view(magic, 4) == "RSPC";
}

// --- simulate -----------------------------------------------------------

struct SimulateArgs {
    CommonFlags common;
    DatasetGenConfig gen;
    std::string name = "dataset";
    std::string classes_csv = "breathing,static,random";
    std::string algo = "nlms";
};

int run_simulate(SimulateArgs& args) {
    args.gen.classes = parse_classes(args.classes_csv);
    args.gen.seed = args.common.seed;
    args.gen.canceller.algo = args.algo == "lms" ? LmsAlgo::Lms : LmsAlgo::Nlms;

    const auto base = std::filesystem::path(args.common.out) / args.name;
    const auto gen = gen_dataset(args.gen, base);

    std::map<std::string, int> counts;
    for (const auto& e : gen.manifest.windows) counts[to_string(e.label.cls)] += 1;
    std::cout << "wrote " << gen.manifest.windows.size() << " windows to " << base.string()
              << (args.gen.raw ? "_{ref,surv}" : "") << ".iqd\n";
    for (const auto& [name, count] : counts) std::cout << "  " << name << ": " << count << "\n";
    return kExitOk;
}

// --- cancel -------------------------------------------------------------

struct CancelArgs {
    CommonFlags common;
    std::string ref_path;
    std::string surv_path;
    std::string name = "cancelled";
    LmsConfig lms{.taps = 32, .mu = 0.5, .algo = LmsAlgo::Nlms, .eps = 1e-8};
    std::string algo = "nlms";
    double trim_seconds = 0.0;
    double settle_fraction = 0.2;
};

int run_cancel(CancelArgs& args) {
    args.lms.algo = args.algo == "lms" ? LmsAlgo::Lms : LmsAlgo::Nlms;
    const Dataset ref = read_dataset(args.ref_path);
    const Dataset surv = read_dataset(args.surv_path);
    if (ref.windows.size() != surv.windows.size())
        throw std::invalid_argument("cancel: reference/surveillance window counts differ");

    const double fs = surv.manifest.sample_rate_hz;
    const auto trim = static_cast<Eigen::Index>(std::llround(args.trim_seconds * fs));

    CsvReport dsa_report;
    dsa_report.kind = ReportKind::Metrics;
    dsa_report.comments = {"dsa per window, settle_fraction=" + format_double(args.settle_fraction)};
    dsa_report.columns = {"window", "dsa_db"};

    std::vector<LabeledWindow> cancelled;
    double dsa_sum = 0.0;
    for (std::size_t i = 0; i < surv.windows.size(); ++i) {
        ComplexSeries r{window_to_complex(ref.windows[i]), fs};
        ComplexSeries s{window_to_complex(surv.windows[i]), fs};
        const ComplexSeries e = cancel(r, s, args.lms);
        const double dsa = dsa_suppression(s, e, args.settle_fraction);
        dsa_sum += dsa;
        dsa_report.add_row({std::to_string(i), format_double(dsa)});

        LabeledWindow w;
        const Eigen::Index keep = e.samples.size() - std::min(trim, e.samples.size() - 1);
        const auto block = e.samples.tail(keep);
        w.iq.resize(2, keep);
        w.iq.row(0) = block.real().transpose().cast<float>();
        w.iq.row(1) = block.imag().transpose().cast<float>();
        w.label = surv.windows[i].label;
        w.source_id = surv.windows[i].source_id + ":cancelled";
        cancelled.push_back(std::move(w));
    }

    DatasetMeta meta{.sample_rate_hz = fs,
                     .window_seconds = surv.manifest.window_seconds - args.trim_seconds,
                     .seed = surv.manifest.seed};
    const auto base = std::filesystem::path(args.common.out) / args.name;
    write_dataset(cancelled, meta, base);
    dsa_report.write(std::filesystem::path(args.common.out) / "cancel_dsa.csv");

    std::cout << "cancelled " << cancelled.size() << " windows -> " << base.string() << ".iqd\n";
    if (!cancelled.empty())
        std::cout << "mean dsa: " << format_double(dsa_sum / static_cast<double>(cancelled.size()))
                  << " dB\n";
    return kExitOk;
}

// --- train --------------------------------------------------------------

struct TrainArgs {
    CommonFlags common;
    std::string data_path;
    std::string model = "cnn";
    std::string task = "activity";
    std::string name;
    cnn::TrainConfig cnn_cfg;
    double dropout = 0.3;
    int depth = 11;
    int kernel_len = 9;
    int dense_units = 64;
    forest::ForestConfig forest_cfg;
};

int run_train(TrainArgs& args) {
    const Dataset ds = read_dataset(args.data_path);
    const auto out_dir = std::filesystem::path(args.common.out);

    if (args.model == "cnn") {
        if (args.task != "activity")
            throw std::invalid_argument("train: the cnn model only supports --task activity");
        args.cnn_cfg.seed = args.common.seed;
        args.cnn_cfg.dropout_p = args.dropout;

        int n_classes = 0;
        {
            std::map<ActivityClass, int> present;
            for (const auto& w : ds.windows) present[w.label.cls] += 1;
            n_classes = static_cast<int>(present.size());
        }
        const auto arch = cnn::default_arch(n_classes, args.depth, args.kernel_len,
                                            args.dense_units, args.dropout);
        auto [model, history] = cnn::train<float>(ds.windows, arch, args.cnn_cfg);

        const auto model_path = out_dir / (args.name.empty() ? "cnn.rspc" : args.name);
        cnn::save_model(model, model_path);

        CsvReport report;
        report.kind = ReportKind::History;
        report.comments = split_comments("train", args.cnn_cfg.val_fraction, args.common.seed);
        report.columns = {"epoch", "train_loss", "train_accuracy", "val_accuracy"};
        for (std::size_t e = 0; e < history.train_loss.size(); ++e)
            report.add_row({std::to_string(e), format_double(history.train_loss[e]),
                            format_double(history.train_accuracy[e]),
                            format_double(history.val_accuracy[e])});
        report.write(out_dir / "history.csv");

        std::cout << "trained cnn on " << ds.windows.size() << " windows -> "
                  << model_path.string() << "\n";
        if (!history.val_accuracy.empty())
            std::cout << "final val accuracy: " << format_double(history.val_accuracy.back())
                      << "\n";
        return kExitOk;
    }

    if (args.model != "forest")
        throw std::invalid_argument("train: unknown model " + args.model);
    args.forest_cfg.seed = args.common.seed;
    const auto task = args.task == "rate" ? forest::ForestTask::RateBpm
                                          : forest::ForestTask::Activity;
    if (args.task != "rate" && args.task != "activity")
        throw std::invalid_argument("train: unknown task " + args.task);

    // Train on the stratified train side so eval --split val is held out.
    const SplitIndices split = split_dataset(ds.windows, args.cnn_cfg.val_fraction,
                                             args.common.seed);
    std::vector<LabeledWindow> train_set;
    for (int i : split.train) train_set.push_back(ds.windows[static_cast<std::size_t>(i)]);

    const auto model = forest::fit_forest(train_set, ds.manifest.sample_rate_hz,
                                          args.forest_cfg, task);
    const auto default_name = task == forest::ForestTask::RateBpm ? "forest_rate.rspf"
                                                                  : "forest_activity.rspf";
    const auto model_path = out_dir / (args.name.empty() ? default_name : args.name);
    forest::save_forest(model, model_path);

    CsvReport report;
    report.kind = ReportKind::History;
    report.comments = split_comments("train", args.cnn_cfg.val_fraction, args.common.seed);
    report.columns = {"trees", "oob_accuracy"};
    report.add_row({std::to_string(model.trees.size()),
                    model.oob_accuracy ? format_double(*model.oob_accuracy) : ""});
    report.write(out_dir / "history.csv");

    std::cout << "trained forest (" << args.task << ") on " << train_set.size()
              << " windows -> " << model_path.string() << "\n";
    if (model.oob_accuracy)
        std::cout << "oob accuracy: " << format_double(*model.oob_accuracy) << "\n";
    return kExitOk;
}

// --- eval ---------------------------------------------------------------

struct EvalArgs {
    CommonFlags common;
    std::string data_path;
    std::string model_path;
    std::string split = "val";
    double val_fraction = 0.2;
};

ConfusionMatrix eval_confusion(const EvalArgs& args, const Dataset& ds,
                               const std::vector<int>& idx) {
    if (is_cnn_model_file(args.model_path)) {
        const auto model = cnn::load_model(args.model_path);
        return cnn::evaluate(model, ds.windows, idx);
    }
    const auto model = forest::load_forest(args.model_path);
    if (model.task == forest::ForestTask::RateBpm) {
        // Rate models are scored over the rate-labeled breathing subset.
        std::vector<int> labeled;
        for (int i : idx)
            if (ds.windows[static_cast<std::size_t>(i)].label.rate_bpm) labeled.push_back(i);
        return forest::evaluate(model, ds.windows, labeled);
    }
    return forest::evaluate(model, ds.windows, idx);
}

int run_eval(EvalArgs& args) {
    const Dataset ds = read_dataset(args.data_path);
    const auto idx = selected_indices(ds, args.split, args.val_fraction, args.common.seed);
    const ConfusionMatrix conf = eval_confusion(args, ds, idx);

    const auto comments = split_comments(args.split, args.val_fraction, args.common.seed);
    confusion_report(conf, comments).write(std::filesystem::path(args.common.out) /
                                           "confusion.csv");
    metrics_report(conf, comments).write(std::filesystem::path(args.common.out) / "metrics.csv");

    std::cout << "evaluated " << conf.total() << " windows, overall accuracy "
              << format_double(overall_accuracy(conf)) << "\n";
    for (int c = 0; c < conf.num_classes(); ++c) {
        const auto m = metrics(conf, c);
        std::cout << "  " << conf.class_names[static_cast<std::size_t>(c)]
                  << ": acc=" << format_double(m.accuracy)
                  << " sens=" << (m.sensitivity ? format_double(*m.sensitivity) : "n/a")
                  << " spec=" << (m.specificity ? format_double(*m.specificity) : "n/a") << "\n";
    }
    return kExitOk;
}

// --- sweep --------------------------------------------------------------

struct SweepArgs {
    CommonFlags common;
    std::string data_path;
    std::vector<int> depths;
    std::vector<int> samples;
    int epochs = 10;
    int equal_updates = 0;  // > 0: same SGD update budget at every point
    double lr = 1e-3;
    double lr_decay = 1.0;
    double val_fraction = 0.2;
    double dropout = 0.3;
    int kernel_len = 9;
    int depth = 11;
};

int run_sweep(SweepArgs& args) {
    if (args.depths.empty() == args.samples.empty())
        throw std::invalid_argument("sweep: give exactly one of --depths or --samples");

    const Dataset ds = read_dataset(args.data_path);
    const SplitIndices split = split_dataset(ds.windows, args.val_fraction, args.common.seed);

    cnn::TrainConfig cfg;
    cfg.epochs = args.epochs;
    cfg.seed = args.common.seed;
    cfg.val_fraction = args.val_fraction;
    cfg.dropout_p = args.dropout;
    cfg.learning_rate = args.lr;
    cfg.lr_decay = args.lr_decay;

    const auto epochs_for = [&](std::size_t n_windows) {
        if (args.equal_updates <= 0) return args.epochs;
        const double train_count = std::floor(static_cast<double>(n_windows));
        const double batches = std::ceil(train_count * (1.0 - args.val_fraction) /
                                         static_cast<double>(cfg.batch_size));
        return std::max(1, static_cast<int>(std::llround(args.equal_updates / batches)));
    };

    int n_classes = 0;
    {
        std::map<ActivityClass, int> present;
        for (const auto& w : ds.windows) present[w.label.cls] += 1;
        n_classes = static_cast<int>(present.size());
    }

    CsvReport report;
    report.kind = args.depths.empty() ? ReportKind::SampleSweep : ReportKind::DepthSweep;
    report.comments = split_comments("val", args.val_fraction, args.common.seed);
    report.columns = {args.depths.empty() ? "samples_per_class" : "kernel_depth", "accuracy",
                      "status"};

    const auto evaluate_on_val = [&](const cnn::CnnModel<float>& model) {
        return overall_accuracy(cnn::evaluate(model, ds.windows, split.val));
    };

    const auto points = args.depths.empty() ? args.samples : args.depths;
    for (const int point : points) {
        try {
            double accuracy = 0.0;
            if (!args.depths.empty()) {
                // Full dataset in: train() applies the same seeded split, so
                // a one-point sweep reproduces `train` + `eval --split val`.
                const auto arch =
                    cnn::default_arch(n_classes, point, args.kernel_len, 64, args.dropout);
                cfg.epochs = epochs_for(ds.windows.size());
                auto [model, history] = cnn::train<float>(ds.windows, arch, cfg);
                accuracy = evaluate_on_val(model);
            } else {
                // First `point` windows per class from the train side.
                std::map<ActivityClass, int> taken;
                std::vector<LabeledWindow> train_set;
                for (int i : split.train) {
                    const auto& w = ds.windows[static_cast<std::size_t>(i)];
                    if (taken[w.label.cls] >= point) continue;
                    taken[w.label.cls] += 1;
                    train_set.push_back(w);
                }
                const auto arch =
                    cnn::default_arch(n_classes, args.depth, args.kernel_len, 64, args.dropout);
                cfg.epochs = epochs_for(train_set.size());
                auto [model, history] = cnn::train<float>(train_set, arch, cfg);
                accuracy = evaluate_on_val(model);
            }
            report.add_row({std::to_string(point), format_double(accuracy), "ok"});
            std::cout << "sweep point " << point << ": accuracy " << format_double(accuracy)
                      << "\n";
        } catch (const std::exception& e) {
            report.add_row({std::to_string(point), "", std::string("failed: ") + e.what()});
            std::cout << "sweep point " << point << " failed: " << e.what() << "\n";
        }
    }
    const auto path = std::filesystem::path(args.common.out) /
                      (args.depths.empty() ? "sample_sweep.csv" : "depth_sweep.csv");
    report.write(path);
    std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
}

// --- rate ---------------------------------------------------------------

struct RateArgs {
    CommonFlags common;
    std::string data_path;
    std::string activity_model;
    std::string rate_model;
    std::string split = "val";
    double val_fraction = 0.2;
};

int run_rate(RateArgs& args) {
    const Dataset ds = read_dataset(args.data_path);
    const auto idx = selected_indices(ds, args.split, args.val_fraction, args.common.seed);

    const auto rate_model = forest::load_forest(args.rate_model);
    if (rate_model.task != forest::ForestTask::RateBpm)
        throw std::invalid_argument("rate: --rate-model is not a rate-task forest");

    // Fig. 1 ordering: the activity stage gates which windows are scored.
    const bool activity_is_cnn = is_cnn_model_file(args.activity_model);
    cnn::CnnModel<float> cnn_model;
    forest::ForestModel forest_model;
    if (activity_is_cnn) cnn_model = cnn::load_model(args.activity_model);
    else forest_model = forest::load_forest(args.activity_model);

    CsvReport report;
    report.kind = ReportKind::RateEval;
    report.comments = split_comments(args.split, args.val_fraction, args.common.seed);
    report.columns = {"window", "true_bpm", "class_bpm", "expected_bpm"};

    double abs_err_sum = 0.0;
    long scored = 0, exact = 0, within1 = 0;
    for (const int i : idx) {
        const auto& w = ds.windows[static_cast<std::size_t>(i)];
        const std::string predicted_class =
            activity_is_cnn ? cnn::predict(cnn_model, w).class_name
                            : forest::classify_window(forest_model, w).class_name;
        if (predicted_class != "breathing") continue;
        const auto est = forest::estimate_rate(rate_model, w);
        if (!w.label.rate_bpm) continue;  // unlabeled windows cannot be scored

        ++scored;
        const int truth = *w.label.rate_bpm;
        abs_err_sum += std::abs(est.expected_bpm - truth);
        exact += est.class_bpm == truth;
        within1 += std::abs(est.class_bpm - truth) <= 1;
        report.add_row({std::to_string(i), std::to_string(truth), std::to_string(est.class_bpm),
                        format_double(est.expected_bpm)});
    }

    if (scored == 0) {
        report.comments.push_back("note: no breathing-classified rate-labeled windows to score");
        std::cout << "note: no breathing-classified rate-labeled windows to score\n";
    } else {
        const double mae = abs_err_sum / static_cast<double>(scored);
        report.comments.push_back("exact_bin_accuracy=" +
                                  format_double(static_cast<double>(exact) / scored));
        report.comments.push_back("within_1bpm_accuracy=" +
                                  format_double(static_cast<double>(within1) / scored));
        report.comments.push_back("mae_bpm=" + format_double(mae));
        std::cout << "scored " << scored << " windows\n"
                  << "  exact-bin accuracy: "
                  << format_double(static_cast<double>(exact) / scored) << "\n"
                  << "  within +-1 bpm:     "
                  << format_double(static_cast<double>(within1) / scored) << "\n"
                  << "  mae:                " << format_double(abs_err_sum / scored) << " bpm\n";
    }
    report.write(std::filesystem::path(args.common.out) / "rate_eval.csv");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic passive-WiFi respiration sensing pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a labeled synthetic dataset");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--name", sim.name, "Dataset base name")->capture_default_str();
    sim_cmd->add_option("--per-class", sim.gen.per_class, "Windows per activity class")
        ->capture_default_str();
    sim_cmd->add_option("--classes", sim.classes_csv, "Comma list: breathing,static,random")
        ->capture_default_str();
    sim_cmd->add_option("--snr-db", sim.gen.snr_db,
                        "Surveillance noise level relative to the target echo (inf disables)")
        ->capture_default_str();
    sim_cmd->add_option("--label-fraction", sim.gen.label_fraction,
                        "Fraction of breathing windows keeping a rate label")
        ->capture_default_str();
    sim_cmd->add_flag("--raw", sim.gen.raw, "Store pre-cancellation reference/surveillance pairs");
    sim_cmd->add_option("--window-seconds", sim.gen.window_seconds, "Window length in seconds")
        ->capture_default_str();
    sim_cmd->add_option("--warmup-seconds", sim.gen.warmup_seconds,
                        "Leading seconds for canceller settling")
        ->capture_default_str();
    sim_cmd->add_option("--carrier", sim.gen.carrier_hz, "Carrier frequency in Hz")
        ->capture_default_str();
    sim_cmd->add_option("--displacement", sim.gen.breathing_displacement_m,
                        "Breathing chest displacement in meters")
        ->capture_default_str();
    sim_cmd->add_option("--step-sigma", sim.gen.random_step_sigma_m,
                        "Random-motion step sigma in meters per sample")
        ->capture_default_str();
    sim_cmd->add_option("--echo-amplitude", sim.gen.echo_amplitude, "Target echo amplitude")
        ->capture_default_str();
    sim_cmd->add_option("--echo-delay", sim.gen.echo_delay, "Target echo delay (sim-rate samples)")
        ->capture_default_str();
    sim_cmd->add_option("--decim", sim.gen.decim_factor, "Sim-rate to output-rate factor")
        ->capture_default_str();
    sim_cmd->add_option("--taps", sim.gen.canceller.taps, "Canceller taps")->capture_default_str();
    sim_cmd->add_option("--mu", sim.gen.canceller.mu, "Canceller step size")
        ->capture_default_str();
    sim_cmd->add_option("--algo", sim.algo, "Canceller algorithm: lms|nlms")
        ->check(CLI::IsMember({"lms", "nlms"}))
        ->capture_default_str();

    CancelArgs can;
    auto* can_cmd = app.add_subcommand("cancel", "Run the adaptive canceller over a raw pair");
    add_common(can_cmd, can.common);
    can_cmd->add_option("--ref", can.ref_path, "Reference dataset (.iqd base)")->required();
    can_cmd->add_option("--surv", can.surv_path, "Surveillance dataset (.iqd base)")->required();
    can_cmd->add_option("--name", can.name, "Output dataset base name")->capture_default_str();
    can_cmd->add_option("--taps", can.lms.taps, "Filter taps")->capture_default_str();
    can_cmd->add_option("--mu", can.lms.mu, "Step size")->capture_default_str();
    can_cmd->add_option("--algo", can.algo, "lms|nlms")
        ->check(CLI::IsMember({"lms", "nlms"}))
        ->capture_default_str();
    can_cmd->add_flag("--paper-literal", can.lms.paper_literal,
                      "Verbatim single-tap recursion (for comparison)");
    can_cmd->add_option("--trim-seconds", can.trim_seconds,
                        "Seconds to drop from the start of each cancelled window")
        ->capture_default_str();
    can_cmd->add_option("--settle", can.settle_fraction, "DSA settle fraction")
        ->capture_default_str();

    TrainArgs tr;
    auto* tr_cmd = app.add_subcommand("train", "Train the CNN or a random forest");
    add_common(tr_cmd, tr.common);
    tr_cmd->add_option("--data", tr.data_path, "Dataset (.iqd base)")->required();
    tr_cmd->add_option("--model", tr.model, "cnn|forest")
        ->check(CLI::IsMember({"cnn", "forest"}))
        ->capture_default_str();
    tr_cmd->add_option("--task", tr.task, "activity|rate (forest only)")
        ->check(CLI::IsMember({"activity", "rate"}))
        ->capture_default_str();
    tr_cmd->add_option("--name", tr.name, "Model file name (defaults per model)");
    tr_cmd->add_option("--epochs", tr.cnn_cfg.epochs, "Training epochs")->capture_default_str();
    tr_cmd->add_option("--batch", tr.cnn_cfg.batch_size, "Batch size")->capture_default_str();
    tr_cmd->add_option("--lr", tr.cnn_cfg.learning_rate, "Learning rate")->capture_default_str();
    tr_cmd->add_option("--lr-decay", tr.cnn_cfg.lr_decay, "Per-epoch learning-rate multiplier")
        ->capture_default_str();
    tr_cmd->add_option("--momentum", tr.cnn_cfg.momentum, "SGD momentum")->capture_default_str();
    tr_cmd->add_option("--l1", tr.cnn_cfg.lambda1, "L1 penalty on first dense activations")
        ->capture_default_str();
    tr_cmd->add_option("--l2", tr.cnn_cfg.lambda2, "L2 penalty on conv weights")
        ->capture_default_str();
    tr_cmd->add_option("--dropout", tr.dropout, "Dropout probability")->capture_default_str();
    tr_cmd->add_option("--depth", tr.depth, "Conv kernel depth")->capture_default_str();
    tr_cmd->add_option("--kernel-len", tr.kernel_len, "Conv kernel length")->capture_default_str();
    tr_cmd->add_option("--dense-units", tr.dense_units, "Hidden dense width")
        ->capture_default_str();
    tr_cmd->add_option("--val-fraction", tr.cnn_cfg.val_fraction, "Validation fraction")
        ->capture_default_str();
    tr_cmd->add_option("--trees", tr.forest_cfg.n_trees, "Forest size")->capture_default_str();
    tr_cmd->add_option("--max-depth", tr.forest_cfg.max_depth, "Tree depth limit (-1 unlimited)")
        ->capture_default_str();
    tr_cmd->add_option("--min-split", tr.forest_cfg.min_samples_split, "Min samples to split")
        ->capture_default_str();

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset split");
    add_common(ev_cmd, ev.common);
    ev_cmd->add_option("--data", ev.data_path, "Dataset (.iqd base)")->required();
    ev_cmd->add_option("--model", ev.model_path, "Model file (.rspc or .rspf)")->required();
    ev_cmd->add_option("--split", ev.split, "val|train|all")
        ->check(CLI::IsMember({"val", "train", "all"}))
        ->capture_default_str();
    ev_cmd->add_option("--val-fraction", ev.val_fraction, "Validation fraction")
        ->capture_default_str();

    SweepArgs sw;
    auto* sw_cmd = app.add_subcommand("sweep", "Kernel-depth or sample-count sweep");
    add_common(sw_cmd, sw.common);
    sw_cmd->add_option("--data", sw.data_path, "Dataset (.iqd base)")->required();
    sw_cmd->add_option("--depths", sw.depths, "Kernel depths to sweep")->delimiter(',');
    sw_cmd->add_option("--samples", sw.samples, "Per-class sample counts to sweep")
        ->delimiter(',');
    sw_cmd->add_option("--epochs", sw.epochs, "Epochs per sweep point")->capture_default_str();
    sw_cmd->add_option("--equal-updates", sw.equal_updates,
                       "Give every point this SGD update budget instead of fixed epochs");
    sw_cmd->add_option("--lr", sw.lr, "Learning rate")->capture_default_str();
    sw_cmd->add_option("--lr-decay", sw.lr_decay, "Per-epoch learning-rate multiplier")
        ->capture_default_str();
    sw_cmd->add_option("--val-fraction", sw.val_fraction, "Validation fraction")
        ->capture_default_str();
    sw_cmd->add_option("--dropout", sw.dropout, "Dropout probability")->capture_default_str();
    sw_cmd->add_option("--depth", sw.depth, "Kernel depth for sample sweeps")
        ->capture_default_str();
    sw_cmd->add_option("--kernel-len", sw.kernel_len, "Conv kernel length")->capture_default_str();

    RateArgs ra;
    auto* ra_cmd = app.add_subcommand("rate", "Gated breathing-rate evaluation");
    add_common(ra_cmd, ra.common);
    ra_cmd->add_option("--data", ra.data_path, "Dataset (.iqd base)")->required();
    ra_cmd->add_option("--activity-model", ra.activity_model, "Activity model file")->required();
    ra_cmd->add_option("--rate-model", ra.rate_model, "Rate forest file")->required();
    ra_cmd->add_option("--split", ra.split, "val|train|all")
        ->check(CLI::IsMember({"val", "train", "all"}))
        ->capture_default_str();
    ra_cmd->add_option("--val-fraction", ra.val_fraction, "Validation fraction")
        ->capture_default_str();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (can_cmd->parsed()) return run_cancel(can);
        if (tr_cmd->parsed()) return run_train(tr);
        if (ev_cmd->parsed()) return run_eval(ev);
        if (sw_cmd->parsed()) return run_sweep(sw);
        if (ra_cmd->parsed()) return run_rate(ra);
    } catch (const std::invalid_argument& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return kExitContract;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
