#ifndef RESPI_FOREST_HPP
#define RESPI_FOREST_HPP

#include "respi/types.hpp"

#include <filesystem>

namespace respi::forest {

/// 16 base features: operators {real, imag, magnitude, unwrapped phase} x
/// statistical moments {mean, unbiased variance, skewness, excess kurtosis},
/// operator-major layout. Zero-variance series yield skewness = kurtosis = 0.
constexpr int kBaseFeatureCount = 16;

Eigen::VectorXd extract_features(const Eigen::VectorXcd& window);

/// Base features plus envelope-rhythm features taken from the spectrum of
/// |z|^2 in the breathing band (dominant frequency, centroid, band powers,
/// modulation depth). Amplitude moments alone carry no time-scale, so rate
/// models need these harmonically informative columns.
Eigen::VectorXd extract_rate_features(const Eigen::VectorXcd& window, double sample_rate_hz);

constexpr int kRateFeatureCount = kBaseFeatureCount + 11;

enum class FeatureSet { Base, Rate };

/// Counts-weighted two-child Gini: N_l sum_k p_kl (1 - p_kl) + N_r sum_k
/// p_kr (1 - p_kr), no normalization by the parent size.
double gini_cost(const std::vector<int>& left_labels, const std::vector<int>& right_labels);

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double cost = 0.0;
};

/// Exhaustive threshold search at midpoints between consecutive distinct
/// sorted values of each candidate feature; minimizes gini_cost with ties
/// broken by lowest feature index, then lowest threshold. Returns nothing
/// when every candidate feature is constant over the rows.
std::optional<Split> best_split(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                const std::vector<int>& rows,
                                const std::vector<int>& feature_subset, int num_classes);

std::optional<Split> best_split(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                const std::vector<int>& feature_subset, int num_classes);

enum class ForestTask { Activity, RateBpm };

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 12;          // < 0 grows to purity
    int min_samples_split = 2;
    int features_per_split = 0;  // 0 selects floor(sqrt(F))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct SplitNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Eigen::VectorXi counts;  // leaf class counts; empty on internal nodes

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<SplitNode> nodes;

    const SplitNode& leaf_for(const Eigen::VectorXd& features) const;
    int vote(const Eigen::VectorXd& features) const;  // leaf majority, ties to lowest class
};

struct ForestModel {
    ForestTask task = ForestTask::Activity;
    FeatureSet featureset = FeatureSet::Base;
    std::vector<std::string> class_names;
    int feature_dim = 0;
    double sample_rate_hz = 0.0;  // used by rate feature extraction
    std::vector<Tree> trees;
    std::optional<double> oob_accuracy;  // present when trained with bootstrap

    int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// Core fit on a prepared feature matrix (row per sample). Per-tree seeds
/// derive from (seed, tree index), so results are schedule-independent.
ForestModel fit_forest(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                       std::vector<std::string> class_names, const ForestConfig& cfg);

/// Task wrapper over labeled windows. Activity uses the 16 base features and
/// the activity classes present; RateBpm trains 21 classes (10..30 bpm) on
/// rate-labeled breathing windows with the extended feature set and throws
/// invalid_argument when too few labeled windows exist.
ForestModel fit_forest(const std::vector<LabeledWindow>& windows, double sample_rate_hz,
                       const ForestConfig& cfg, ForestTask task);

struct ForestPrediction {
    int class_index = 0;
    std::string class_name;
    Eigen::VectorXd vote_fractions;
};

/// Majority vote across trees; vote ties resolve to the lowest class index.
ForestPrediction forest_predict(const ForestModel& model, const Eigen::VectorXd& features);

/// Feature extraction chosen by the model's feature set, then prediction.
ForestPrediction classify_window(const ForestModel& model, const LabeledWindow& window);

struct RateEstimate {
    int class_bpm = 0;
    double expected_bpm = 0.0;
    Eigen::VectorXd vote_fractions;
};

/// Vote argmax in bpm plus the vote-weighted mean of class centers.
RateEstimate estimate_rate(const ForestModel& model, const LabeledWindow& window);

ConfusionMatrix evaluate(const ForestModel& model, const std::vector<LabeledWindow>& windows,
                         const std::vector<int>& indices);

/// Plain-text tree table with a versioned header; lossless round trip.
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace respi::forest

#endif  // RESPI_FOREST_HPP
