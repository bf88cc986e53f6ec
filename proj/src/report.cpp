#include "respi/report.hpp"

#include "respi/dataset.hpp"

#include <cstdio>
#include <sstream>

namespace respi {

const char* to_string(ReportKind kind) {
    switch (kind) {
        case ReportKind::ConfusionMatrix: return "confusion_matrix";
        case ReportKind::Metrics: return "metrics";
        case ReportKind::DepthSweep: return "depth_sweep";
        case ReportKind::SampleSweep: return "sample_sweep";
        case ReportKind::ModelComparison: return "model_comparison";
        case ReportKind::RateEval: return "rate_eval";
        case ReportKind::History: return "history";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void CsvReport::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("report: row width does not match columns");
    rows.push_back(std::move(cells));
}

void CsvReport::write(const std::filesystem::path& path) const {
    std::ostringstream out;
    out << "# kind=" << to_string(kind) << "\n";
    for (const auto& c : comments) out << "# " << c << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

CsvReport confusion_report(const ConfusionMatrix& conf, std::vector<std::string> comments) {
    CsvReport report;
    report.kind = ReportKind::ConfusionMatrix;
    report.comments = std::move(comments);
    report.columns.push_back("true_class");
    for (const auto& n : conf.class_names) report.columns.push_back("pred_" + n);
    for (int r = 0; r < conf.num_classes(); ++r) {
        std::vector<std::string> row{conf.class_names[static_cast<std::size_t>(r)]};
        for (int c = 0; c < conf.num_classes(); ++c)
            row.push_back(std::to_string(conf.counts(r, c)));
        report.add_row(std::move(row));
    }
    return report;
}

CsvReport metrics_report(const ConfusionMatrix& conf, std::vector<std::string> comments) {
    CsvReport report;
    report.kind = ReportKind::Metrics;
    report.comments = std::move(comments);
    report.columns = {"class", "accuracy", "sensitivity", "specificity"};
    for (int c = 0; c < conf.num_classes(); ++c) {
        const ClassMetrics m = metrics(conf, c);
        report.add_row({conf.class_names[static_cast<std::size_t>(c)], format_double(m.accuracy),
                        m.sensitivity ? format_double(*m.sensitivity) : "",
                        m.specificity ? format_double(*m.specificity) : ""});
    }
    return report;
}

}  // namespace respi
