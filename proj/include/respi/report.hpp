#ifndef RESPI_REPORT_HPP
#define RESPI_REPORT_HPP

#include "respi/metrics.hpp"
#include "respi/types.hpp"

#include <filesystem>

namespace respi {

enum class ReportKind {
    ConfusionMatrix,
    Metrics,
    DepthSweep,
    SampleSweep,
    ModelComparison,
    RateEval,
    History,
};

const char* to_string(ReportKind kind);

/// CSV table written atomically; comments become leading '#' lines so every
/// report can carry its seed / split provenance.
struct CsvReport {
    ReportKind kind = ReportKind::Metrics;
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    void write(const std::filesystem::path& path) const;
};

std::string format_double(double v);

/// Confusion matrix as a CSV (true class per row) plus a one-vs-rest metrics
/// table (empty cells for undefined ratios).
CsvReport confusion_report(const ConfusionMatrix& conf, std::vector<std::string> comments);
CsvReport metrics_report(const ConfusionMatrix& conf, std::vector<std::string> comments);

}  // namespace respi

#endif  // RESPI_REPORT_HPP
