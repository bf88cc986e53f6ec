#ifndef RESPI_METRICS_HPP
#define RESPI_METRICS_HPP

#include "respi/types.hpp"

namespace respi {

/// One-vs-rest reduction of a confusion matrix for one positive class.
struct BinaryCounts {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;
};

BinaryCounts one_vs_rest(const ConfusionMatrix& conf, int positive_class);

/// accuracy = (TP+TN)/total, sensitivity = TP/(TP+FN), specificity = TN/(TN+FP).
/// Ratios with a zero denominator are reported as absent rather than 0.
///
/// Note: specificity here is TN/(TN+FP), the complement of the false-positive
/// rate. FP/(FP+TN) is sometimes (mis)labelled specificity; it is not used.
struct ClassMetrics {
    double accuracy = 0.0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

ClassMetrics metrics(const ConfusionMatrix& conf, int positive_class);
ClassMetrics metrics(const ConfusionMatrix& conf, const std::string& positive_class);

/// trace/total over all classes.
double overall_accuracy(const ConfusionMatrix& conf);

}  // namespace respi

#endif  // RESPI_METRICS_HPP
