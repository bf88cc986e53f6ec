#include "respi/metrics.hpp"

#include <algorithm>

namespace respi {

ActivityClass activity_from_string(const std::string& s) {
    if (s == "breathing") return ActivityClass::Breathing;
    if (s == "static") return ActivityClass::Static;
    if (s == "random_motion") return ActivityClass::RandomMotion;
    throw std::invalid_argument("unknown activity class: " + s);
}

Eigen::VectorXcd window_to_complex(const LabeledWindow& w) {
    Eigen::VectorXcd out(w.iq.cols());
    out.real() = w.iq.row(0).transpose().cast<double>();
    out.imag() = w.iq.row(1).transpose().cast<double>();
    return out;
}

BinaryCounts one_vs_rest(const ConfusionMatrix& conf, int positive_class) {
    if (positive_class < 0 || positive_class >= conf.num_classes())
        throw std::invalid_argument("metrics: unknown positive class index");
    BinaryCounts c;
    const auto& m = conf.counts;
    c.tp = m(positive_class, positive_class);
    c.fn = m.row(positive_class).sum() - c.tp;
    c.fp = m.col(positive_class).sum() - c.tp;
    c.tn = m.sum() - c.tp - c.fn - c.fp;
    return c;
}

ClassMetrics metrics(const ConfusionMatrix& conf, int positive_class) {
    if (conf.total() <= 0) throw std::invalid_argument("metrics: empty confusion matrix");
    const BinaryCounts c = one_vs_rest(conf, positive_class);
    ClassMetrics out;
    out.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.tp + c.tn + c.fp + c.fn);
    if (c.tp + c.fn > 0)
        out.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tn + c.fp > 0)
        out.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return out;
}

ClassMetrics metrics(const ConfusionMatrix& conf, const std::string& positive_class) {
    const auto it = std::find(conf.class_names.begin(), conf.class_names.end(), positive_class);
    if (it == conf.class_names.end())
        throw std::invalid_argument("metrics: unknown positive class: " + positive_class);
    return metrics(conf, static_cast<int>(it - conf.class_names.begin()));
}

double overall_accuracy(const ConfusionMatrix& conf) {
    if (conf.total() <= 0) throw std::invalid_argument("overall_accuracy: empty confusion matrix");
    return static_cast<double>(conf.counts.trace()) / static_cast<double>(conf.total());
}

}  // namespace respi
