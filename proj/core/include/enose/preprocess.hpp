#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "enose/acquisition.hpp"
#include "enose/linalg.hpp"

namespace enose::prep {

struct FilterConfig {
  /// Moving-average window length; odd, >= 1.
  int window_m = 5;
  /// Degree of the baseline polynomial; 0..5.
  int baseline_degree = 2;
  /// Fraction of the session at each end used as baseline anchors when no
  /// exposure window is known.
  double edge_anchor_fraction = 0.10;
  /// Trailing seconds of the recovery phase used as a baseline anchor when the
  /// exposure window is known.
  double recovery_anchor_s = 10.0;

  void validate() const;
};

/// Centered moving average. Near the ends the window is cut at the series
/// boundary and averages only the samples it still covers, so no values are
/// invented. Throws on empty input or an even window.
std::vector<double> moving_average(std::span<const double> series, int window_m);

/// Polynomial coefficients, lowest order first, in the units of the time axis
/// they were fitted on.
struct Polynomial {
  std::vector<double> coeffs;
  double operator()(double t) const;
};

/// Least-squares polynomial through the anchor samples (mask[i] == true).
/// Throws std::domain_error when the anchors cannot determine the polynomial.
Polynomial fit_baseline(std::span<const double> series, std::span<const double> t,
                        const std::vector<bool>& anchors, int degree);

/// series - fit_baseline(series, t, anchors, degree) evaluated at every t.
std::vector<double> remove_baseline(std::span<const double> series, std::span<const double> t,
                                    const std::vector<bool>& anchors, int degree);

/// All-true anchor mask.
std::vector<bool> all_anchors(std::size_t n);

/// Leading and trailing `fraction` of n samples (at least one each).
std::vector<bool> edge_anchors(std::size_t n, double fraction);

/// Clean-air anchors for a session: the pre-exposure phase plus the last
/// `recovery_anchor_s` seconds when the exposure window is known, edge
/// anchors otherwise.
std::vector<bool> session_anchors(const acq::Session& session, const FilterConfig& cfg);

/// Per-feature z-scoring fitted on a training matrix (population std).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  /// Zero-variance features; these pass through untransformed.
  std::vector<bool> constant;

  std::size_t dim() const noexcept { return mean.size(); }
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& m) const;
  Matrix inverse(const Matrix& m) const;
};

Standardizer fit_standardizer(const Matrix& training);

void write_standardizer(std::ostream& out, const Standardizer& s);
Standardizer read_standardizer(std::istream& in);

/// Baseline-corrected, smoothed channel voltages of one session.
struct ProcessedSession {
  std::vector<std::int64_t> t_ms;
  std::array<std::vector<double>, kChannelCount> channels;
  acq::SessionMeta meta;
};

/// Voltage conversion, baseline removal on clean-air anchors, then smoothing.
ProcessedSession preprocess_session(const acq::Session& session, const FilterConfig& cfg);

/// Same header as the raw session CSV, values in volts, preceded by a
/// `# processed ...` comment that records the filter configuration.
void write_processed_csv(std::ostream& out, const ProcessedSession& s, const FilterConfig& cfg);
ProcessedSession read_processed_csv(std::istream& in);

}  // namespace enose::prep
