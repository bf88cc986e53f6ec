#include "respi/forest.hpp"

#include "respi/dsp.hpp"
#include "respi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace respi::forest {

namespace {

// mean, unbiased variance, skewness, excess kurtosis. Skewness and kurtosis
// use biased central moments (g1, g2 conventions); both are 0 for a
// (near-)constant series.
Eigen::Vector4d moments(const Eigen::VectorXd& x) {
    const double n = static_cast<double>(x.size());
    const double mean = x.mean();
    const Eigen::ArrayXd d = x.array() - mean;
    const double m2 = d.square().sum() / n;
    Eigen::Vector4d out;
    out[0] = mean;
    out[1] = n > 1.0 ? d.square().sum() / (n - 1.0) : 0.0;
    if (m2 < 1e-24) {
        out[2] = 0.0;
        out[3] = 0.0;
    } else {
        const double m3 = d.cube().sum() / n;
        const double m4 = d.square().square().sum() / n;
        out[2] = m3 / std::pow(m2, 1.5);
        out[3] = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

struct EnvelopeSpectrum {
    Eigen::VectorXd freqs_hz;
    Eigen::VectorXd magnitude;
    double mod_index = 0.0;
};

// Spectrum of the instantaneous power |z|^2 over the breathing band,
// computed as a dense direct DFT of the block-averaged, Hann-tapered,
// mean-removed envelope.
EnvelopeSpectrum envelope_spectrum(const Eigen::VectorXcd& window, double fs) {
    const Eigen::Index n = window.size();
    Eigen::VectorXd power(n);
    for (Eigen::Index i = 0; i < n; ++i) power[i] = std::norm(window[i]);

    const int block = std::max<int>(1, static_cast<int>(std::lround(fs / 20.0)));
    const Eigen::Index k_out = n / block;
    Eigen::VectorXd env(k_out);
    for (Eigen::Index k = 0; k < k_out; ++k)
        env[k] = power.segment(k * block, block).mean();
    const double fs_env = fs / block;

    EnvelopeSpectrum spec;
    const double env_mean = env.mean();
    const double env_sd = std::sqrt((env.array() - env_mean).square().sum() /
                                    std::max<double>(1.0, static_cast<double>(k_out)));
    spec.mod_index = env_mean > 1e-30 ? env_sd / env_mean : 0.0;

    Eigen::VectorXd tapered(k_out);
    for (Eigen::Index k = 0; k < k_out; ++k) {
        const double hann =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / std::max<double>(1.0, k_out - 1.0));
        tapered[k] = (env[k] - env_mean) * hann;
    }

    constexpr double kGridLo = 0.05, kGridHi = 2.0, kGridStep = 0.005;
    const int n_freqs = static_cast<int>(std::lround((kGridHi - kGridLo) / kGridStep)) + 1;
    spec.freqs_hz.resize(n_freqs);
    spec.magnitude.resize(n_freqs);
    for (int fi = 0; fi < n_freqs; ++fi) {
        const double f = kGridLo + kGridStep * fi;
        double re = 0.0, im = 0.0;
        const double w = 2.0 * std::numbers::pi * f / fs_env;
        for (Eigen::Index k = 0; k < k_out; ++k) {
            re += tapered[k] * std::cos(w * k);
            im -= tapered[k] * std::sin(w * k);
        }
        spec.freqs_hz[fi] = f;
        spec.magnitude[fi] = std::hypot(re, im);
    }
    return spec;
}

int argmax_first(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

int argmax_first(const Eigen::VectorXi& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double gini_of_counts(const Eigen::VectorXi& counts) {
    const double n = static_cast<double>(counts.sum());
    if (n == 0.0) return 0.0;
    double sum = 0.0;
    for (int k = 0; k < counts.size(); ++k) {
        const double p = static_cast<double>(counts[k]) / n;
        sum += p * (1.0 - p);
    }
    return n * sum;
}

std::vector<std::string> rate_class_names() {
    std::vector<std::string> names;
    for (int bpm = kMinRateBpm; bpm <= kMaxRateBpm; ++bpm) names.push_back(std::to_string(bpm));
    return names;
}

}  // namespace

Eigen::VectorXd extract_features(const Eigen::VectorXcd& window) {
    if (window.size() < 2) throw std::invalid_argument("extract_features: need >= 2 samples");
    const Eigen::Index n = window.size();

    Eigen::VectorXd re(n), im(n), mag(n), ph(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        re[i] = window[i].real();
        im[i] = window[i].imag();
        mag[i] = std::abs(window[i]);
        ph[i] = std::arg(window[i]);
    }
    const Eigen::VectorXd phase = unwrap_phase(ph);

    Eigen::VectorXd out(kBaseFeatureCount);
    out.segment<4>(0) = moments(re);
    out.segment<4>(4) = moments(im);
    out.segment<4>(8) = moments(mag);
    out.segment<4>(12) = moments(phase);
    return out;
}

Eigen::VectorXd extract_rate_features(const Eigen::VectorXcd& window, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("extract_rate_features: sample rate must be > 0");
    const EnvelopeSpectrum spec = envelope_spectrum(window, sample_rate_hz);

    constexpr double kBandLo = 0.2, kBandHi = 1.2;
    std::vector<int> band;
    for (int i = 0; i < spec.freqs_hz.size(); ++i)
        if (spec.freqs_hz[i] >= kBandLo && spec.freqs_hz[i] <= kBandHi) band.push_back(i);

    double band_sum = 0.0;
    double centroid = 0.0;
    int peak_idx = band.front();
    for (int i : band) {
        band_sum += spec.magnitude[i];
        centroid += spec.magnitude[i] * spec.freqs_hz[i];
        if (spec.magnitude[i] > spec.magnitude[peak_idx]) peak_idx = i;
    }
    const double peak_mag = spec.magnitude[peak_idx];
    const double peak_hz = peak_mag > 0.0 ? spec.freqs_hz[peak_idx] : 0.0;
    centroid = band_sum > 1e-30 ? centroid / band_sum : 0.0;

    // Magnitude at half the peak frequency, for fundamental/harmonic cues.
    double half_mag = 0.0;
    if (peak_mag > 0.0) {
        const double target = peak_hz / 2.0;
        int nearest = 0;
        for (int i = 1; i < spec.freqs_hz.size(); ++i)
            if (std::abs(spec.freqs_hz[i] - target) < std::abs(spec.freqs_hz[nearest] - target))
                nearest = i;
        half_mag = spec.magnitude[nearest];
    }

    Eigen::VectorXd out(kRateFeatureCount);
    out.head<kBaseFeatureCount>() = extract_features(window);
    int j = kBaseFeatureCount;
    out[j++] = peak_hz;
    out[j++] = band_sum > 1e-30 ? peak_mag / band_sum : 0.0;
    out[j++] = centroid;
    out[j++] = peak_mag > 1e-30 ? half_mag / peak_mag : 0.0;
    // Six equal sub-band magnitude fractions across the breathing band.
    const double band_width = (kBandHi - kBandLo) / 6.0;
    for (int b = 0; b < 6; ++b) {
        double sub = 0.0;
        for (int i : band) {
            const double f = spec.freqs_hz[i];
            if (f >= kBandLo + b * band_width && f < kBandLo + (b + 1) * band_width)
                sub += spec.magnitude[i];
        }
        out[j++] = band_sum > 1e-30 ? sub / band_sum : 0.0;
    }
    out[j++] = spec.mod_index;
    return out;
}

double gini_cost(const std::vector<int>& left_labels, const std::vector<int>& right_labels) {
    if (left_labels.empty() && right_labels.empty())
        throw std::invalid_argument("gini_cost: both children empty");
    int max_label = 0;
    for (int l : left_labels) max_label = std::max(max_label, l);
    for (int l : right_labels) max_label = std::max(max_label, l);
    Eigen::VectorXi cl = Eigen::VectorXi::Zero(max_label + 1);
    Eigen::VectorXi cr = Eigen::VectorXi::Zero(max_label + 1);
    for (int l : left_labels) cl[l] += 1;
    for (int l : right_labels) cr[l] += 1;
    return gini_of_counts(cl) + gini_of_counts(cr);
}

std::optional<Split> best_split(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                const std::vector<int>& rows,
                                const std::vector<int>& feature_subset, int num_classes) {
    if (rows.size() < 2) return std::nullopt;

    // Features scanned in ascending index order so cost ties resolve to the
    // lowest feature, then the lowest threshold.
    std::vector<int> ordered = feature_subset;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    std::optional<Split> best;
    std::vector<std::pair<double, int>> column(rows.size());
    Eigen::VectorXi left = Eigen::VectorXi::Zero(num_classes);
    Eigen::VectorXi right(num_classes);

    for (int f : ordered) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const int r = rows[i];
            column[i] = {features(r, f), labels[static_cast<std::size_t>(r)]};
        }
        std::sort(column.begin(), column.end());

        left.setZero();
        right.setZero();
        for (const auto& [v, l] : column) right[l] += 1;

        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            left[column[i].second] += 1;
            right[column[i].second] -= 1;
            if (column[i].first == column[i + 1].first) continue;
            const double threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
            const double cost = gini_of_counts(left) + gini_of_counts(right);
            if (!best || cost < best->cost ||
                (cost == best->cost && (f < best->feature ||
                                        (f == best->feature && threshold < best->threshold)))) {
                best = Split{f, threshold, cost};
            }
        }
    }
    return best;
}

std::optional<Split> best_split(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                const std::vector<int>& feature_subset, int num_classes) {
    std::vector<int> rows(static_cast<std::size_t>(features.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    return best_split(features, labels, rows, feature_subset, num_classes);
}

const SplitNode& Tree::leaf_for(const Eigen::VectorXd& features) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(idx)];
        idx = features[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)];
}

int Tree::vote(const Eigen::VectorXd& features) const {
    return argmax_first(leaf_for(features).counts);
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& features;
    const std::vector<int>& labels;
    int num_classes;
    const ForestConfig& cfg;
    int features_per_split;
    std::mt19937_64 rng;
    Tree tree;

    Eigen::VectorXi count(const std::vector<int>& rows) const {
        Eigen::VectorXi c = Eigen::VectorXi::Zero(num_classes);
        for (int r : rows) c[labels[static_cast<std::size_t>(r)]] += 1;
        return c;
    }

    std::vector<int> sample_features() {
        const int f_total = static_cast<int>(features.cols());
        std::vector<int> all(static_cast<std::size_t>(f_total));
        for (int i = 0; i < f_total; ++i) all[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < features_per_split; ++i) {
            std::uniform_int_distribution<int> pick(i, f_total - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        all.resize(static_cast<std::size_t>(features_per_split));
        return all;
    }

    int build(std::vector<int> rows, int depth) {
        const Eigen::VectorXi counts = count(rows);
        const bool pure = (counts.array() == counts.sum()).any();
        const bool depth_stop = cfg.max_depth >= 0 && depth >= cfg.max_depth;

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::optional<Split> split;
        if (!pure && !depth_stop &&
            static_cast<int>(rows.size()) >= cfg.min_samples_split)
            split = best_split(features, labels, rows, sample_features(), num_classes);

        if (!split) {
            tree.nodes[static_cast<std::size_t>(node_index)].counts = counts;
            return node_index;
        }

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (features(r, split->feature) < split->threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int left = build(std::move(left_rows), depth + 1);
        const int right = build(std::move(right_rows), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }
};

}  // namespace

ForestModel fit_forest(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                       std::vector<std::string> class_names, const ForestConfig& cfg) {
    const int n = static_cast<int>(features.rows());
    if (n < 2) throw std::invalid_argument("fit_forest: need at least 2 samples");
    if (labels.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("fit_forest: label/feature count mismatch");
    if (cfg.n_trees < 1) throw std::invalid_argument("fit_forest: need at least 1 tree");
    const int num_classes = static_cast<int>(class_names.size());
    int distinct = 0;
    {
        Eigen::VectorXi c = Eigen::VectorXi::Zero(num_classes);
        for (int l : labels) {
            if (l < 0 || l >= num_classes)
                throw std::invalid_argument("fit_forest: label out of range");
            c[l] += 1;
        }
        distinct = static_cast<int>((c.array() > 0).count());
    }
    if (distinct < 2) throw std::invalid_argument("fit_forest: need at least 2 classes present");
    int fps = cfg.features_per_split;
    if (fps <= 0) fps = std::max(1, static_cast<int>(std::floor(
                      std::sqrt(static_cast<double>(features.cols())))));
    if (fps > features.cols()) throw std::invalid_argument("fit_forest: features_per_split > F");

    ForestModel model;
    model.class_names = std::move(class_names);
    model.feature_dim = static_cast<int>(features.cols());
    model.trees.reserve(static_cast<std::size_t>(cfg.n_trees));

    std::vector<std::vector<bool>> in_bag(static_cast<std::size_t>(cfg.n_trees));
    for (int t = 0; t < cfg.n_trees; ++t) {
        TreeBuilder builder{features, labels, num_classes, cfg, fps,
                            std::mt19937_64(derive_seed(cfg.seed, 0xF000 + static_cast<std::uint64_t>(t))),
                            {}};
        std::vector<int> rows;
        rows.reserve(static_cast<std::size_t>(n));
        if (cfg.bootstrap) {
            in_bag[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(n), false);
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int i = 0; i < n; ++i) {
                const int r = pick(builder.rng);
                rows.push_back(r);
                in_bag[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)] = true;
            }
        } else {
            for (int i = 0; i < n; ++i) rows.push_back(i);
        }
        builder.build(std::move(rows), 0);
        model.trees.push_back(std::move(builder.tree));
    }

    if (cfg.bootstrap) {
        long correct = 0, voted = 0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXi votes = Eigen::VectorXi::Zero(num_classes);
            bool any = false;
            const Eigen::VectorXd row = features.row(i).transpose();
            for (int t = 0; t < cfg.n_trees; ++t) {
                if (in_bag[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]) continue;
                votes[model.trees[static_cast<std::size_t>(t)].vote(row)] += 1;
                any = true;
            }
            if (!any) continue;
            ++voted;
            correct += argmax_first(votes) == labels[static_cast<std::size_t>(i)];
        }
        if (voted > 0)
            model.oob_accuracy = static_cast<double>(correct) / static_cast<double>(voted);
    }
    return model;
}

ForestModel fit_forest(const std::vector<LabeledWindow>& windows, double sample_rate_hz,
                       const ForestConfig& cfg, ForestTask task) {
    if (task == ForestTask::Activity) {
        std::vector<std::string> names;
        for (ActivityClass c : {ActivityClass::Breathing, ActivityClass::Static,
                                ActivityClass::RandomMotion}) {
            bool present = false;
            for (const auto& w : windows) present |= w.label.cls == c;
            if (present) names.emplace_back(to_string(c));
        }
        if (names.size() < 2)
            throw std::invalid_argument("fit_forest: activity task needs >= 2 classes");

        Eigen::MatrixXd x(static_cast<Eigen::Index>(windows.size()), kBaseFeatureCount);
        std::vector<int> y(windows.size());
        for (std::size_t i = 0; i < windows.size(); ++i) {
            x.row(static_cast<Eigen::Index>(i)) =
                extract_features(window_to_complex(windows[i])).transpose();
            const std::string n = to_string(windows[i].label.cls);
            y[i] = static_cast<int>(std::find(names.begin(), names.end(), n) - names.begin());
        }
        ForestModel model = fit_forest(x, y, names, cfg);
        model.task = ForestTask::Activity;
        model.featureset = FeatureSet::Base;
        model.sample_rate_hz = sample_rate_hz;
        return model;
    }

    // Rate task: 21 classes at 1 bpm resolution over the rate-labeled
    // breathing subset.
    std::vector<const LabeledWindow*> labeled;
    for (const auto& w : windows)
        if (w.label.cls == ActivityClass::Breathing && w.label.rate_bpm) labeled.push_back(&w);
    if (labeled.size() < 2)
        throw std::invalid_argument(
            "fit_forest: rate task needs >= 2 rate-labeled breathing windows, found " +
            std::to_string(labeled.size()));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(labeled.size()), kRateFeatureCount);
    std::vector<int> y(labeled.size());
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            extract_rate_features(window_to_complex(*labeled[i]), sample_rate_hz).transpose();
        y[i] = *labeled[i]->label.rate_bpm - kMinRateBpm;
    }
    int distinct = 0;
    {
        Eigen::VectorXi c = Eigen::VectorXi::Zero(kMaxRateBpm - kMinRateBpm + 1);
        for (int l : y) c[l] += 1;
        distinct = static_cast<int>((c.array() > 0).count());
    }
    if (distinct < 2)
        throw std::invalid_argument("fit_forest: rate task needs >= 2 distinct rates");

    ForestModel model = fit_forest(x, y, rate_class_names(), cfg);
    model.task = ForestTask::RateBpm;
    model.featureset = FeatureSet::Rate;
    model.sample_rate_hz = sample_rate_hz;
    return model;
}

ForestPrediction forest_predict(const ForestModel& model, const Eigen::VectorXd& features) {
    if (features.size() != model.feature_dim)
        throw std::invalid_argument("forest_predict: feature length mismatch");
    Eigen::VectorXi votes = Eigen::VectorXi::Zero(model.num_classes());
    for (const auto& tree : model.trees) votes[tree.vote(features)] += 1;
    ForestPrediction pred;
    pred.class_index = argmax_first(votes);
    pred.class_name = model.class_names[static_cast<std::size_t>(pred.class_index)];
    pred.vote_fractions = votes.cast<double>() / static_cast<double>(model.trees.size());
    return pred;
}

ForestPrediction classify_window(const ForestModel& model, const LabeledWindow& window) {
    const Eigen::VectorXcd z = window_to_complex(window);
    const Eigen::VectorXd f = model.featureset == FeatureSet::Rate
                                  ? extract_rate_features(z, model.sample_rate_hz)
                                  : extract_features(z);
    return forest_predict(model, f);
}

RateEstimate estimate_rate(const ForestModel& model, const LabeledWindow& window) {
    if (model.task != ForestTask::RateBpm)
        throw std::invalid_argument("estimate_rate: model was not trained for the rate task");
    const ForestPrediction pred = classify_window(model, window);
    RateEstimate est;
    est.vote_fractions = pred.vote_fractions;
    est.class_bpm = kMinRateBpm + pred.class_index;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < pred.vote_fractions.size(); ++k) {
        num += pred.vote_fractions[k] * static_cast<double>(kMinRateBpm + k);
        den += pred.vote_fractions[k];
    }
    est.expected_bpm = den > 0.0 ? num / den : static_cast<double>(est.class_bpm);
    return est;
}

ConfusionMatrix evaluate(const ForestModel& model, const std::vector<LabeledWindow>& windows,
                         const std::vector<int>& indices) {
    ConfusionMatrix conf(model.class_names);
    for (int idx : indices) {
        const auto& w = windows[static_cast<std::size_t>(idx)];
        std::string name;
        if (model.task == ForestTask::RateBpm) {
            if (!w.label.rate_bpm)
                throw std::invalid_argument("forest evaluate: window lacks a rate label");
            name = std::to_string(*w.label.rate_bpm);
        } else {
            name = to_string(w.label.cls);
        }
        const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
        if (it == model.class_names.end())
            throw std::invalid_argument("forest evaluate: window class not in model: " + name);
        const auto pred = classify_window(model, w);
        conf.add(static_cast<int>(it - model.class_names.begin()), pred.class_index);
    }
    return conf;
}

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "RSPF 1\n";
    out << "task " << (model.task == ForestTask::Activity ? "activity" : "rate") << "\n";
    out << "featureset " << (model.featureset == FeatureSet::Base ? "base" : "rate") << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", model.sample_rate_hz);
    out << "sample_rate_hz " << buf << "\n";
    out << "feature_dim " << model.feature_dim << "\n";
    out << "classes " << model.class_names.size();
    for (const auto& n : model.class_names) out << " " << n;
    out << "\n";
    if (model.oob_accuracy) {
        std::snprintf(buf, sizeof buf, "%.17g", *model.oob_accuracy);
        out << "oob " << buf << "\n";
    } else {
        out << "oob none\n";
    }
    out << "trees " << model.trees.size() << "\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        out << "tree " << t << " nodes " << tree.nodes.size() << "\n";
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const auto& node = tree.nodes[i];
            if (node.is_leaf()) {
                out << i << " leaf";
                for (int k = 0; k < node.counts.size(); ++k) out << " " << node.counts[k];
                out << "\n";
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", node.threshold);
                out << i << " split " << node.feature << " " << buf << " " << node.left << " "
                    << node.right << "\n";
            }
        }
    }
    write_file_atomic(path, out.str());
}

ForestModel load_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open forest file: " + path.string());

    auto expect_key = [&](const std::string& key) {
        std::string k;
        if (!(in >> k) || k != key) throw FormatError("forest file: expected '" + key + "'");
    };

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "RSPF")
        throw FormatError("bad forest magic (expected RSPF): " + path.string());
    if (version != 1) throw FormatError("unsupported forest version");

    ForestModel model;
    std::string value;
    expect_key("task");
    in >> value;
    if (value == "activity") model.task = ForestTask::Activity;
    else if (value == "rate") model.task = ForestTask::RateBpm;
    else throw FormatError("forest file: unknown task " + value);
    expect_key("featureset");
    in >> value;
    if (value == "base") model.featureset = FeatureSet::Base;
    else if (value == "rate") model.featureset = FeatureSet::Rate;
    else throw FormatError("forest file: unknown featureset " + value);
    expect_key("sample_rate_hz");
    in >> model.sample_rate_hz;
    expect_key("feature_dim");
    in >> model.feature_dim;
    std::size_t n_classes = 0;
    expect_key("classes");
    in >> n_classes;
    if (n_classes < 2 || n_classes > 4096) throw FormatError("forest file: implausible classes");
    for (std::size_t i = 0; i < n_classes; ++i) {
        in >> value;
        model.class_names.push_back(value);
    }
    expect_key("oob");
    in >> value;
    if (value != "none") {
        try {
            model.oob_accuracy = std::stod(value);
        } catch (const std::exception&) {
            throw FormatError("forest file: bad oob value " + value);
        }
    }
    std::size_t n_trees = 0;
    expect_key("trees");
    in >> n_trees;
    if (!in) throw FormatError("forest file: bad header");

    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t index = 0, n_nodes = 0;
        expect_key("tree");
        in >> index;
        expect_key("nodes");
        in >> n_nodes;
        if (!in || index != t) throw FormatError("forest file: bad tree header");
        Tree tree;
        tree.nodes.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::size_t node_id = 0;
            std::string kind;
            if (!(in >> node_id >> kind) || node_id != i)
                throw FormatError("forest file: bad node id");
            SplitNode& node = tree.nodes[i];
            if (kind == "split") {
                if (!(in >> node.feature >> node.threshold >> node.left >> node.right))
                    throw FormatError("forest file: bad split node");
                if (node.feature < 0 || node.feature >= model.feature_dim ||
                    node.left < 0 || node.right < 0 ||
                    node.left >= static_cast<int>(n_nodes) ||
                    node.right >= static_cast<int>(n_nodes))
                    throw IntegrityError("forest file: node reference out of range");
            } else if (kind == "leaf") {
                node.counts.resize(static_cast<Eigen::Index>(n_classes));
                for (std::size_t k = 0; k < n_classes; ++k)
                    if (!(in >> node.counts[static_cast<Eigen::Index>(k)]))
                        throw FormatError("forest file: bad leaf counts");
            } else {
                throw FormatError("forest file: unknown node kind " + kind);
            }
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace respi::forest
