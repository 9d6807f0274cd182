#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "enose/bench.hpp"

namespace enose::bench {

enum class ReportFormat { csv, svg };

/// Writes into `dir` (created if missing).
///  csv: report.csv (key,value metrics and config), confusion.csv,
///       predictions.csv, timing.csv (wall time only, so the rest is
///       reproducible byte for byte).
///  svg: scatter.svg (first two projected coordinates by class) and
///       predictions.svg (predicted vs true class per test sample).
/// Throws std::invalid_argument for an empty path, std::runtime_error when a
/// file cannot be written.
void emit_report(const RunReport& report, const std::filesystem::path& dir, ReportFormat format);

/// report.csv, metrics.csv-style regression summary, predictions and loss trace.
void emit_regression_report(const RegressionReport& report, const std::filesystem::path& dir);

void write_report_csv(std::ostream& out, const RunReport& report);
void write_scatter_svg(std::ostream& out, const RunReport& report);
void write_prediction_svg(std::ostream& out, const RunReport& report);

/// Numeric entries of a key,value report file.
std::map<std::string, double> read_report_metrics(std::istream& in);
std::map<std::string, double> read_report_metrics(const std::filesystem::path& path);

}  // namespace enose::bench
