#include "enose/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace enose::prep {

void FilterConfig::validate() const {
  if (window_m < 1 || window_m % 2 == 0)
    throw std::invalid_argument("FilterConfig: window_m must be odd and >= 1");
  if (baseline_degree < 0 || baseline_degree > 5)
    throw std::invalid_argument("FilterConfig: baseline_degree must be in 0..5");
  if (!(edge_anchor_fraction > 0.0 && edge_anchor_fraction <= 0.5))
    throw std::invalid_argument("FilterConfig: edge_anchor_fraction must be in (0, 0.5]");
  if (!(recovery_anchor_s > 0.0))
    throw std::invalid_argument("FilterConfig: recovery_anchor_s must be > 0");
}

std::vector<double> moving_average(std::span<const double> series, int window_m) {
  if (series.empty()) throw std::invalid_argument("moving_average: empty series");
  if (window_m < 1 || window_m % 2 == 0)
    throw std::invalid_argument("moving_average: window must be odd and >= 1");
  const std::size_t n = series.size();
  const auto half = static_cast<std::size_t>(window_m / 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += series[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double Polynomial::operator()(double t) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * t + coeffs[k];
  return v;
}

Polynomial fit_baseline(std::span<const double> series, std::span<const double> t,
                        const std::vector<bool>& anchors, int degree) {
  if (series.size() != t.size() || series.size() != anchors.size())
    throw std::invalid_argument("fit_baseline: series, time and anchor lengths differ");
  if (degree < 0) throw std::invalid_argument("fit_baseline: negative degree");
  const auto cols = static_cast<std::size_t>(degree) + 1;

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < anchors.size(); ++i)
    if (anchors[i]) idx.push_back(i);
  if (idx.size() < cols)
    throw std::domain_error("fit_baseline: " + std::to_string(idx.size()) +
                            " anchor samples cannot determine a degree-" +
                            std::to_string(degree) + " polynomial");

  Matrix design(idx.size(), cols);
  std::vector<double> rhs(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    double p = 1.0;
    for (std::size_t c = 0; c < cols; ++c) {
      design(r, c) = p;
      p *= t[idx[r]];
    }
    rhs[r] = series[idx[r]];
  }
  try {
    return Polynomial{least_squares(design, rhs)};
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string("fit_baseline: rank-deficient fit (") + e.what() + ")");
  }
}

std::vector<double> remove_baseline(std::span<const double> series, std::span<const double> t,
                                    const std::vector<bool>& anchors, int degree) {
  const Polynomial p = fit_baseline(series, t, anchors, degree);
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] - p(t[i]);
  return out;
}

std::vector<bool> all_anchors(std::size_t n) { return std::vector<bool>(n, true); }

std::vector<bool> edge_anchors(std::size_t n, double fraction) {
  std::vector<bool> mask(n, false);
  if (n == 0) return mask;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * n)));
  for (std::size_t i = 0; i < std::min(k, n); ++i) {
    mask[i] = true;
    mask[n - 1 - i] = true;
  }
  return mask;
}

std::vector<bool> session_anchors(const acq::Session& session, const FilterConfig& cfg) {
  const std::size_t n = session.frames.size();
  if (!session.meta.exposure || n == 0) return edge_anchors(n, cfg.edge_anchor_fraction);
  const auto& w = *session.meta.exposure;
  const std::int64_t tail_start =
      session.frames.back().t_ms - static_cast<std::int64_t>(std::llround(cfg.recovery_anchor_s * 1000.0));
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = session.frames[i].t_ms;
    mask[i] = t < w.start_ms || (t >= w.end_ms && t > tail_start);
  }
  return mask;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != dim()) throw std::invalid_argument("Standardizer: dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j)
    out[j] = constant[j] ? row[j] : (row[j] - mean[j]) / stddev[j];
  return out;
}

Matrix Standardizer::apply(const Matrix& m) const {
  if (m.cols() != dim()) throw std::invalid_argument("Standardizer: dimension mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto z = apply(m.row(i));
    std::copy(z.begin(), z.end(), out.row(i).begin());
  }
  return out;
}

Matrix Standardizer::inverse(const Matrix& m) const {
  if (m.cols() != dim()) throw std::invalid_argument("Standardizer: dimension mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = constant[j] ? m(i, j) : m(i, j) * stddev[j] + mean[j];
  return out;
}

Standardizer fit_standardizer(const Matrix& training) {
  if (training.rows() == 0) throw std::invalid_argument("fit_standardizer: empty training matrix");
  const std::size_t n = training.rows();
  const std::size_t d = training.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  s.constant.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += training(i, j);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (training(i, j) - m) * (training(i, j) - m);
    v /= static_cast<double>(n);
    s.mean[j] = m;
    s.stddev[j] = std::sqrt(v);
    // Zero spread, or spread at round-off level of the values themselves.
    s.constant[j] = !(s.stddev[j] > 1e-12 * std::max(1.0, std::abs(m)));
    if (s.constant[j]) s.stddev[j] = 0.0;
  }
  return s;
}

void write_standardizer(std::ostream& out, const Standardizer& s) {
  out << "standardizer " << s.dim() << '\n';
  detail::write_vector(out, "mean", s.mean);
  detail::write_vector(out, "std", s.stddev);
}

Standardizer read_standardizer(std::istream& in) {
  detail::expect_token(in, "standardizer");
  const auto d = detail::read_value<std::size_t>(in, "standardizer dimension");
  Standardizer s;
  s.mean = detail::read_vector(in, "mean");
  s.stddev = detail::read_vector(in, "std");
  if (s.mean.size() != d || s.stddev.size() != d)
    throw std::runtime_error("model file: standardizer dimension mismatch");
  s.constant.resize(d);
  for (std::size_t j = 0; j < d; ++j) s.constant[j] = s.stddev[j] == 0.0;
  return s;
}

ProcessedSession preprocess_session(const acq::Session& session, const FilterConfig& cfg) {
  cfg.validate();
  if (session.frames.empty()) throw std::invalid_argument("preprocess: empty session");
  ProcessedSession out;
  out.meta = session.meta;
  out.t_ms.reserve(session.frames.size());
  for (const auto& f : session.frames) out.t_ms.push_back(f.t_ms);

  const auto volts = acq::channel_voltages(session);
  const auto t = acq::timestamps_seconds(session);
  const auto anchors = session_anchors(session, cfg);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto detrended = remove_baseline(volts[c], t, anchors, cfg.baseline_degree);
    out.channels[c] = moving_average(detrended, cfg.window_m);
  }
  return out;
}

void write_processed_csv(std::ostream& out, const ProcessedSession& s, const FilterConfig& cfg) {
  out << "# processed window_m=" << cfg.window_m << " baseline_degree=" << cfg.baseline_degree
      << " units=volts\n";
  out << acq::kSessionHeader << '\n';
  for (std::size_t i = 0; i < s.t_ms.size(); ++i) {
    out << s.t_ms[i];
    for (std::size_t c = 0; c < kChannelCount; ++c) out << ',' << format_double(s.channels[c][i]);
    out << '\n';
  }
}

ProcessedSession read_processed_csv(std::istream& in) {
  ProcessedSession s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#' || line == acq::kSessionHeader) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != kChannelCount + 1)
      throw std::runtime_error("processed csv line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      s.t_ms.push_back(std::stoll(fields[0]));
      for (std::size_t c = 0; c < kChannelCount; ++c)
        s.channels[c].push_back(parse_double(fields[c + 1]));
    } catch (const std::exception&) {
      throw std::runtime_error("processed csv line " + std::to_string(lineno) + ": bad number");
    }
    if (s.t_ms.size() > 1 && s.t_ms.back() <= s.t_ms[s.t_ms.size() - 2])
      throw std::runtime_error("processed csv line " + std::to_string(lineno) +
                               ": timestamps must increase");
  }
  if (s.t_ms.empty()) throw std::runtime_error("processed csv: no data rows");
  return s;
}

}  // namespace enose::prep
