#include "respi/forest.hpp"

#include "respi/dataset.hpp"
#include "respi/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace respi;
using namespace respi::forest;

namespace {

// Independent moment computation via direct accumulation loops.
void oracle_moments(const std::vector<double>& x, double out[4]) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, ss = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        ss += d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    out[0] = mean;
    out[1] = ss / (n - 1.0);
    if (m2 < 1e-24) {
        out[2] = 0.0;
        out[3] = 0.0;
    } else {
        out[2] = m3 / std::pow(m2, 1.5);
        out[3] = m4 / (m2 * m2) - 3.0;
    }
}

// Exhaustive brute force over every (feature, midpoint) candidate, evaluated
// with the public gini_cost; same lexicographic tie rule.
std::optional<Split> brute_force_split(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                       const std::vector<int>& subset, int classes) {
    std::optional<Split> best;
    std::vector<int> features = subset;
    std::sort(features.begin(), features.end());
    for (int f : features) {
        std::vector<double> values;
        for (Eigen::Index r = 0; r < x.rows(); ++r) values.push_back(x(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
            std::vector<int> left, right;
            for (Eigen::Index r = 0; r < x.rows(); ++r)
                (x(r, f) < threshold ? left : right).push_back(y[static_cast<std::size_t>(r)]);
            const double cost = gini_cost(left, right);
            if (!best || cost < best->cost ||
                (cost == best->cost &&
                 (f < best->feature || (f == best->feature && threshold < best->threshold))))
                best = Split{f, threshold, cost};
        }
    }
    (void)classes;
    return best;
}

Eigen::VectorXcd constant_window(Eigen::Index n, Complex v) {
    return Eigen::VectorXcd::Constant(n, v);
}

}  // namespace

TEST_CASE("extract_features on a constant window") {
    const auto f = extract_features(constant_window(4000, {3.0, 0.0}));
    REQUIRE(f.size() == 16);
    // real part: mean 3, var/skew/kurt 0.
    CHECK(f[0] == doctest::Approx(3.0));
    CHECK(f[1] == doctest::Approx(0.0));
    CHECK(f[2] == doctest::Approx(0.0));
    CHECK(f[3] == doctest::Approx(0.0));
    // magnitude block: (3, 0, 0, 0).
    CHECK(f[8] == doctest::Approx(3.0));
    CHECK(f[9] == doctest::Approx(0.0));
}

TEST_CASE("extract_features on an alternating pure-imaginary window") {
    const Eigen::Index r = 4000;
    Eigen::VectorXcd z(r);
    for (Eigen::Index i = 0; i < r; ++i) z[i] = Complex(0.0, i % 2 == 0 ? 1.0 : -1.0);
    const auto f = extract_features(z);
    CHECK(f[0] == doctest::Approx(0.0));   // real mean
    CHECK(f[1] == doctest::Approx(0.0));   // real variance
    CHECK(f[4] == doctest::Approx(0.0));   // imag mean
    // unbiased variance R/(R-1).
    CHECK(f[5] == doctest::Approx(4000.0 / 3999.0));
    CHECK(f[5] == doctest::Approx(1.00025).epsilon(1e-5));
}

TEST_CASE("extract_features matches an independent moment oracle") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 2.0);
    const Eigen::Index n = 500;
    Eigen::VectorXcd z(n);
    for (auto i = 0; i < n; ++i) z[i] = Complex(g(rng) + 0.3, g(rng) - 1.0);
    const auto f = extract_features(z);

    std::vector<double> re(n), im(n), mag(n), ph(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        re[static_cast<std::size_t>(i)] = z[i].real();
        im[static_cast<std::size_t>(i)] = z[i].imag();
        mag[static_cast<std::size_t>(i)] = std::abs(z[i]);
        ph[static_cast<std::size_t>(i)] = std::arg(z[i]);
    }
    // Unwrap with the same +-pi convention.
    double offset = 0.0;
    std::vector<double> unwrapped(ph.size());
    unwrapped[0] = ph[0];
    for (std::size_t i = 1; i < ph.size(); ++i) {
        const double d = ph[i] - ph[i - 1];
        if (d > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
        else if (d < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
        unwrapped[i] = ph[i] + offset;
    }

    double expect[4];
    const std::vector<std::vector<double>*> ops = {&re, &im, &mag, &unwrapped};
    for (int op = 0; op < 4; ++op) {
        oracle_moments(*ops[static_cast<std::size_t>(op)], expect);
        for (int mo = 0; mo < 4; ++mo)
            CHECK(f[op * 4 + mo] == doctest::Approx(expect[mo]).epsilon(1e-9));
    }
}

TEST_CASE("feature mean shifts with a constant offset, higher real moments unchanged") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd z(300);
    for (auto i = 0; i < 300; ++i) z[i] = Complex(g(rng), g(rng));
    const auto base = extract_features(z);
    const Eigen::VectorXcd z_shift = (z.array() + Complex(2.5, 0.0)).matrix();
    const auto shifted = extract_features(z_shift);
    CHECK(shifted[0] == doctest::Approx(base[0] + 2.5));
    CHECK(shifted[4] == doctest::Approx(base[4]));  // imag mean unchanged
    for (int mo = 1; mo < 4; ++mo) {
        CHECK(shifted[0 + mo] == doctest::Approx(base[0 + mo]).epsilon(1e-9));
        CHECK(shifted[4 + mo] == doctest::Approx(base[4 + mo]).epsilon(1e-9));
    }
}

TEST_CASE("gini_cost hand examples") {
    CHECK(gini_cost({0, 0}, {1, 1}) == doctest::Approx(0.0));
    CHECK(gini_cost({0, 1}, {0, 1}) == doctest::Approx(2.0));
    CHECK(gini_cost({0, 0, 1}, {2}) == doctest::Approx(4.0 / 3.0));
    CHECK_THROWS_AS(gini_cost({}, {}), std::invalid_argument);
    CHECK(gini_cost({0, 0}, {}) == doctest::Approx(0.0));
}

TEST_CASE("best_split hand examples") {
    SUBCASE("forced split on two separable samples") {
        Eigen::MatrixXd x(2, 1);
        x << 1.0, 2.0;
        const auto split = best_split(x, {0, 1}, {0}, 2);
        REQUIRE(split.has_value());
        CHECK(split->feature == 0);
        CHECK(split->threshold == doctest::Approx(1.5));
        CHECK(split->cost == doctest::Approx(0.0));
    }

    SUBCASE("all-identical features give no split") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 3);
        CHECK_FALSE(best_split(x, {0, 1, 0, 1, 0}, {0, 1, 2}, 2).has_value());
    }
}

TEST_CASE("best_split equals exhaustive brute force on random instances") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> n_d(2, 50), f_d(1, 5), k_d(2, 3);
        const int n = n_d(rng);
        const int f = f_d(rng);
        const int k = k_d(rng);
        // Coarse value grid makes exact ties common, exercising the
        // tie-break rule.
        std::uniform_int_distribution<int> v_d(0, 4), y_d(0, k - 1);
        Eigen::MatrixXd x(n, f);
        std::vector<int> y(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < f; ++c) x(r, c) = static_cast<double>(v_d(rng));
            y[static_cast<std::size_t>(r)] = y_d(rng);
        }
        std::vector<int> subset;
        for (int c = 0; c < f; ++c) subset.push_back(c);

        const auto mine = best_split(x, y, subset, k);
        const auto oracle = brute_force_split(x, y, subset, k);
        REQUIRE(mine.has_value() == oracle.has_value());
        if (mine) {
            CHECK(mine->feature == oracle->feature);
            CHECK(mine->threshold == doctest::Approx(oracle->threshold));
            CHECK(mine->cost == doctest::Approx(oracle->cost));
        }
    }
}

TEST_CASE("best_split choice is invariant under monotone feature transforms") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(30, 2);
    std::vector<int> y(30);
    for (int r = 0; r < 30; ++r) {
        x(r, 0) = g(rng);
        x(r, 1) = g(rng);
        y[static_cast<std::size_t>(r)] = x(r, 0) + 0.3 * g(rng) > 0 ? 1 : 0;
    }
    const auto before = best_split(x, y, {0, 1}, 2);
    REQUIRE(before.has_value());

    // exp() is strictly increasing: the chosen partition must be identical.
    Eigen::MatrixXd xt = x;
    for (int r = 0; r < 30; ++r) xt(r, before->feature) = std::exp(x(r, before->feature));
    const auto after = best_split(xt, y, {0, 1}, 2);
    REQUIRE(after.has_value());
    CHECK(after->feature == before->feature);
    CHECK(after->cost == doctest::Approx(before->cost));
    for (int r = 0; r < 30; ++r) {
        const bool left_before = x(r, before->feature) < before->threshold;
        const bool left_after = xt(r, after->feature) < after->threshold;
        CHECK(left_before == left_after);
    }
}

namespace {

std::vector<LabeledWindow> synthetic_activity_windows(int per_class, std::uint64_t seed) {
    // Lightweight stand-ins: distinct variance/structure per class.
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<LabeledWindow> windows;
    const Eigen::Index r = 400;
    for (int cls = 0; cls < 3; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            LabeledWindow w;
            w.iq.resize(2, r);
            for (Eigen::Index c = 0; c < r; ++c) {
                const float t = static_cast<float>(c) / 400.0f;
                float scale = 1.0f;
                if (cls == 0) scale = 1.0f + 0.8f * std::sin(2.0f * 3.14159f * 2.0f * t);
                if (cls == 2) scale = 3.0f;
                w.iq(0, c) = scale * g(rng);
                w.iq(1, c) = scale * g(rng);
            }
            w.label.cls = static_cast<ActivityClass>(cls);
            if (cls == 0) w.label.rate_bpm = 10 + (i % 21);
            w.source_id = "synthetic";
            windows.push_back(std::move(w));
        }
    }
    return windows;
}

}  // namespace

TEST_CASE("single unrestricted tree interpolates separable data") {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> g(0.0, 1.0);
    const int n = 40;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < 3; ++c) x(r, c) = g(rng);
        y[static_cast<std::size_t>(r)] = x(r, 1) > 0.2 ? 1 : 0;
    }
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.max_depth = -1;
    cfg.features_per_split = 3;
    cfg.seed = 5;
    const auto model = fit_forest(x, y, {"a", "b"}, cfg);
    for (int r = 0; r < n; ++r) {
        const auto pred = forest_predict(model, x.row(r).transpose());
        CHECK(pred.class_index == y[static_cast<std::size_t>(r)]);
    }
}

TEST_CASE("forests are deterministic per seed") {
    const auto windows = synthetic_activity_windows(10, 3);
    ForestConfig cfg;
    cfg.n_trees = 15;
    cfg.seed = 44;
    const auto a = fit_forest(windows, 400.0, cfg, ForestTask::Activity);
    const auto b = fit_forest(windows, 400.0, cfg, ForestTask::Activity);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t i = 0; i < a.trees[t].nodes.size(); ++i) {
            CHECK(a.trees[t].nodes[i].feature == b.trees[t].nodes[i].feature);
            CHECK(a.trees[t].nodes[i].threshold == b.trees[t].nodes[i].threshold);
        }
    }
    CHECK(a.oob_accuracy.has_value());
}

TEST_CASE("out-of-bag accuracy tracks a held-out estimate") {
    const auto windows = synthetic_activity_windows(25, 7);  // 75 windows
    const auto split = split_dataset(windows, 0.33, 19);

    std::vector<LabeledWindow> train_set;
    for (int i : split.train) train_set.push_back(windows[static_cast<std::size_t>(i)]);

    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 101;
    const auto model = fit_forest(train_set, 400.0, cfg, ForestTask::Activity);
    REQUIRE(model.oob_accuracy.has_value());

    const auto conf = evaluate(model, windows, split.val);
    const double held_out = overall_accuracy(conf);
    CHECK(std::abs(*model.oob_accuracy - held_out) <= 0.15);
}

TEST_CASE("forest_predict vote rules") {
    // Hand-built two-tree forest over one feature.
    ForestModel model;
    model.task = ForestTask::Activity;
    model.featureset = FeatureSet::Base;
    model.class_names = {"a", "b"};
    model.feature_dim = 1;

    Tree left_votes_a;
    {
        SplitNode leaf;
        leaf.counts = Eigen::Vector2i(3, 1);
        left_votes_a.nodes.push_back(leaf);
    }
    Tree votes_b;
    {
        SplitNode leaf;
        leaf.counts = Eigen::Vector2i(0, 4);
        votes_b.nodes.push_back(leaf);
    }

    SUBCASE("unanimous") {
        model.trees = {left_votes_a, left_votes_a};
        const auto pred = forest_predict(model, Eigen::VectorXd::Zero(1));
        CHECK(pred.class_index == 0);
        CHECK(pred.vote_fractions[0] == doctest::Approx(1.0));
    }

    SUBCASE("1-1 tie resolves to the lowest class index") {
        model.trees = {votes_b, left_votes_a};
        const auto pred = forest_predict(model, Eigen::VectorXd::Zero(1));
        CHECK(pred.class_index == 0);
    }

    SUBCASE("single tree equals that tree's leaf majority") {
        model.trees = {votes_b};
        const auto pred = forest_predict(model, Eigen::VectorXd::Zero(1));
        CHECK(pred.class_index == 1);
        CHECK(pred.vote_fractions[1] == doctest::Approx(1.0));
    }

    SUBCASE("feature length mismatch rejected") {
        model.trees = {votes_b};
        CHECK_THROWS_AS(forest_predict(model, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    }
}

TEST_CASE("prediction is invariant to tree order") {
    const auto windows = synthetic_activity_windows(8, 23);
    ForestConfig cfg;
    cfg.n_trees = 9;
    cfg.seed = 5;
    auto model = fit_forest(windows, 400.0, cfg, ForestTask::Activity);
    auto shuffled = model;
    std::reverse(shuffled.trees.begin(), shuffled.trees.end());
    for (const auto& w : windows) {
        const auto a = classify_window(model, w);
        const auto b = classify_window(shuffled, w);
        CHECK(a.class_index == b.class_index);
    }
}

TEST_CASE("rate estimation vote readouts") {
    ForestModel model;
    model.task = ForestTask::RateBpm;
    model.featureset = FeatureSet::Rate;
    model.sample_rate_hz = 400.0;
    model.feature_dim = kRateFeatureCount;
    for (int bpm = 10; bpm <= 30; ++bpm) model.class_names.push_back(std::to_string(bpm));

    auto leaf_for = [&](int bpm) {
        Tree t;
        SplitNode leaf;
        leaf.counts = Eigen::VectorXi::Zero(21);
        leaf.counts[bpm - 10] = 5;
        t.nodes.push_back(leaf);
        return t;
    };

    LabeledWindow w;
    w.iq = Eigen::Matrix<float, 2, Eigen::Dynamic>::Random(2, 400);
    w.label.cls = ActivityClass::Breathing;

    SUBCASE("unanimous 15 bpm") {
        model.trees = {leaf_for(15), leaf_for(15), leaf_for(15)};
        const auto est = estimate_rate(model, w);
        CHECK(est.class_bpm == 15);
        CHECK(est.expected_bpm == doctest::Approx(15.0));
    }

    SUBCASE("50/50 between 14 and 16 gives expected 15") {
        model.trees = {leaf_for(14), leaf_for(16)};
        const auto est = estimate_rate(model, w);
        CHECK(est.expected_bpm == doctest::Approx(15.0));
        CHECK(est.class_bpm == 14);  // vote tie resolves to the lower bpm
    }

    SUBCASE("activity model rejected") {
        model.task = ForestTask::Activity;
        model.trees = {leaf_for(15)};
        CHECK_THROWS_AS(estimate_rate(model, w), std::invalid_argument);
    }
}

TEST_CASE("rate task requires labeled breathing windows") {
    auto windows = synthetic_activity_windows(5, 2);
    for (auto& w : windows) w.label.rate_bpm.reset();
    ForestConfig cfg;
    try {
        fit_forest(windows, 400.0, cfg, ForestTask::RateBpm);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("rate task") != std::string::npos);
    }
}

TEST_CASE("forest save/load round trip preserves structure and predictions") {
    const auto windows = synthetic_activity_windows(10, 10);
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 77;
    const auto model = fit_forest(windows, 400.0, cfg, ForestTask::Activity);

    const auto tmp = std::filesystem::temp_directory_path() /
                     ("respi-forest-" + std::to_string(std::random_device{}()) + ".rspf");
    save_forest(model, tmp);
    const auto loaded = load_forest(tmp);
    std::filesystem::remove(tmp);

    CHECK(loaded.feature_dim == model.feature_dim);
    CHECK(loaded.class_names == model.class_names);
    REQUIRE(loaded.trees.size() == model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        REQUIRE(loaded.trees[t].nodes.size() == model.trees[t].nodes.size());
        for (std::size_t i = 0; i < model.trees[t].nodes.size(); ++i) {
            CHECK(loaded.trees[t].nodes[i].feature == model.trees[t].nodes[i].feature);
            CHECK(loaded.trees[t].nodes[i].threshold == model.trees[t].nodes[i].threshold);
        }
    }
    for (const auto& w : windows)
        CHECK(classify_window(model, w).class_index == classify_window(loaded, w).class_index);
}
