#include "enose/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace enose::bench {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void prepare_dir(const std::filesystem::path& dir) {
  if (dir.empty()) throw std::invalid_argument("report path is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

constexpr std::array<const char*, 4> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

const char* colour_for(int label) {
  return kPalette[static_cast<std::size_t>(std::clamp(label, 0, 3))];
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double px_lo = 0.0;
  double px_hi = 1.0;

  double operator()(double v) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return px_lo + (v - lo) / span * (px_hi - px_lo);
  }
};

Axis fit_axis(double lo, double hi, double px_lo, double px_hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, px_lo, px_hi};
}

std::string px(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

void svg_open(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n"
      << "<title>" << title << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
      << "<line x1=\"60\" y1=\"420\" x2=\"620\" y2=\"420\" stroke=\"black\"/>\n"
      << "<line x1=\"60\" y1=\"20\" x2=\"60\" y2=\"420\" stroke=\"black\"/>\n";
}

}  // namespace

void write_report_csv(std::ostream& out, const RunReport& r) {
  out << "key,value\n";
  out << "table," << r.table << '\n';
  out << "seed," << r.seed << '\n';
  out << "n_train," << r.n_train << '\n';
  out << "n_test," << r.n_test << '\n';
  out << "projected_dim," << r.projected_dim << '\n';
  out << "accuracy," << format_double(r.accuracy) << '\n';
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out << "precision_" << r.classes[c] << ',' << format_double(r.precision[c]) << '\n';
    out << "recall_" << r.classes[c] << ',' << format_double(r.recall[c]) << '\n';
  }
  for (const auto& [k, v] : r.config) out << "config_" << k << ',' << csv_escape(v) << '\n';
  for (const auto& n : r.notes) out << "note," << csv_escape(n) << '\n';
}

void write_scatter_svg(std::ostream& out, const RunReport& r) {
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& c = r.samples[i].coords;
    if (i == 0) {
      xlo = xhi = c[0];
      ylo = yhi = c[1];
    }
    xlo = std::min(xlo, c[0]);
    xhi = std::max(xhi, c[0]);
    ylo = std::min(ylo, c[1]);
    yhi = std::max(yhi, c[1]);
  }
  const Axis ax = fit_axis(xlo, xhi, 60, 620);
  const Axis ay = fit_axis(ylo, yhi, 420, 20);
  svg_open(out, "Test samples on the first two components (" + r.table + ")");
  out << "<text x=\"340\" y=\"460\" text-anchor=\"middle\" font-size=\"14\">component 1</text>\n"
      << "<text x=\"20\" y=\"220\" font-size=\"14\" transform=\"rotate(-90 20 220)\">component 2</text>\n";
  for (const auto& s : r.samples) {
    out << "<circle class=\"marker\" cx=\"" << px(ax(s.coords[0])) << "\" cy=\"" << px(ay(s.coords[1]))
        << "\" r=\"4\" fill=\"" << colour_for(s.truth) << "\" stroke=\""
        << (s.truth == s.predicted ? "none" : "black") << "\"/>\n";
  }
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    out << "<text x=\"540\" y=\"" << 40 + 18 * c << "\" font-size=\"12\" fill=\"" << colour_for(r.classes[c])
        << "\">class " << r.classes[c] << "</text>\n";
  }
  out << "</svg>\n";
}

void write_prediction_svg(std::ostream& out, const RunReport& r) {
  int lo = 0, hi = 1;
  if (!r.classes.empty()) {
    lo = r.classes.front();
    hi = r.classes.back();
  }
  const Axis ax = fit_axis(0.0, std::max<double>(1.0, static_cast<double>(r.samples.size()) - 1.0), 60, 620);
  const Axis ay = fit_axis(lo, hi, 420, 20);
  svg_open(out, "Predicted versus true class (" + r.table + ")");
  out << "<text x=\"340\" y=\"460\" text-anchor=\"middle\" font-size=\"14\">test sample</text>\n"
      << "<text x=\"20\" y=\"220\" font-size=\"14\" transform=\"rotate(-90 20 220)\">class</text>\n";
  out << "<polyline class=\"truth\" fill=\"none\" stroke=\"#888888\" points=\"";
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    out << (i ? " " : "") << px(ax(static_cast<double>(i))) << ',' << px(ay(r.samples[i].truth));
  out << "\"/>\n";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    out << "<circle class=\"marker\" cx=\"" << px(ax(static_cast<double>(i))) << "\" cy=\"" << px(ay(s.predicted))
        << "\" r=\"3\" fill=\"" << (s.truth == s.predicted ? "#2ca02c" : "#d62728") << "\"/>\n";
  }
  for (int c = lo; c <= hi; ++c)
    out << "<text x=\"40\" y=\"" << px(ay(c) + 4) << "\" font-size=\"12\" text-anchor=\"end\">" << c << "</text>\n";
  out << "</svg>\n";
}

void emit_report(const RunReport& r, const std::filesystem::path& dir, ReportFormat format) {
  prepare_dir(dir);
  if (format == ReportFormat::svg) {
    auto scatter = open_out(dir / "scatter.svg");
    write_scatter_svg(scatter, r);
    auto pred = open_out(dir / "predictions.svg");
    write_prediction_svg(pred, r);
    return;
  }

  auto report = open_out(dir / "report.csv");
  write_report_csv(report, r);

  auto conf = open_out(dir / "confusion.csv");
  conf << "true\\predicted";
  for (int c : r.classes) conf << ',' << c;
  conf << '\n';
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    conf << r.classes[i];
    for (auto v : r.confusion[i]) conf << ',' << v;
    conf << '\n';
  }

  auto pred = open_out(dir / "predictions.csv");
  pred << "index,true_label,predicted_label,acetone_ppm,ethanol_ppm,methanol_ppm,c1,c2\n";
  for (const auto& s : r.samples) {
    pred << s.index << ',' << s.truth << ',' << s.predicted << ',' << format_double(s.mixture.acetone_ppm) << ','
         << format_double(s.mixture.ethanol_ppm) << ',' << format_double(s.mixture.methanol_ppm) << ','
         << format_double(s.coords[0]) << ',' << format_double(s.coords[1]) << '\n';
  }

  auto timing = open_out(dir / "timing.csv");
  timing << "key,value\nwall_time_s," << format_double(r.wall_time_s) << '\n';
}

void emit_regression_report(const RegressionReport& r, const std::filesystem::path& dir) {
  prepare_dir(dir);
  auto report = open_out(dir / "regression.csv");
  report << "key,value\n";
  report << "table," << r.table << '\n';
  report << "seed," << r.seed << '\n';
  report << "n_train," << r.n_train << '\n';
  report << "n_test," << r.n_test << '\n';
  report << "rmse_ppm," << format_double(r.metrics.rmse) << '\n';
  report << "mae_ppm," << format_double(r.metrics.mae) << '\n';
  report << "r2," << (r.metrics.r2 ? format_double(*r.metrics.r2) : "undefined") << '\n';
  report << "target_range_ppm," << format_double(r.target_range_ppm) << '\n';
  report << "epochs_run," << r.loss_trace.size() << '\n';
  for (const auto& [k, v] : r.config) report << "config_" << k << ',' << csv_escape(v) << '\n';

  auto pred = open_out(dir / "regression_predictions.csv");
  pred << "index,acetone_ppm,predicted_ppm\n";
  for (const auto& s : r.samples)
    pred << s.index << ',' << format_double(s.target_ppm) << ',' << format_double(s.predicted_ppm) << '\n';

  auto loss = open_out(dir / "loss_trace.csv");
  loss << "epoch,mse_scaled\n";
  for (std::size_t e = 0; e < r.loss_trace.size(); ++e) loss << e + 1 << ',' << format_double(r.loss_trace[e]) << '\n';
}

std::map<std::string, double> read_report_metrics(std::istream& in) {
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const auto key = line.substr(0, comma);
    const auto value = line.substr(comma + 1);
    try {
      out[key] = parse_double(value);
    } catch (const std::invalid_argument&) {
      // Non-numeric entries (table name, config text) are skipped.
    }
  }
  return out;
}

std::map<std::string, double> read_report_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_report_metrics(in);
}

}  // namespace enose::bench
