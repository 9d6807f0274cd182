#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enose/linalg.hpp"
#include "enose/preprocess.hpp"

namespace enose::feat {

inline constexpr std::size_t kFeatureDim = 3 * kChannelCount;

/// Per channel: steady response, maximum rise rate and response area over the
/// exposure phase. Layout is [steady c1..c4, slope c1..c4, area c1..c4].
struct FeatureVector {
  std::array<double, kFeatureDim> values{};
  int label = 0;
  GasMixture mixture;
};

struct FeatureConfig {
  /// Fraction of the exposure phase, at its end, averaged for the steady value.
  double steady_fraction = 0.10;
};

/// Throws std::invalid_argument when the session has no exposure window or
/// ends before the exposure phase does.
FeatureVector extract_features(const prep::ProcessedSession& session, const FeatureConfig& cfg = {});

/// Row-per-sample features plus carried-through labels and targets.
struct FeatureTable {
  Matrix x;
  std::vector<int> labels;
  std::vector<GasMixture> mixtures;

  std::size_t size() const noexcept { return labels.size(); }
  void push_back(const FeatureVector& f);
  std::vector<double> acetone_targets() const;
  FeatureTable subset(std::span<const std::size_t> rows) const;
};

/// Header `f1..f12,label,acetone_ppm,ethanol_ppm,methanol_ppm`.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in);

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  std::vector<double> mean;
  /// Row j is the unit principal direction for eigenvalues[j].
  Matrix components;
  /// Covariance eigenvalues (population convention), descending.
  std::vector<double> eigenvalues;
  std::size_t retained_k = 0;

  std::size_t input_dim() const noexcept { return mean.size(); }
  std::vector<double> explained_variance_ratio() const;
};

inline constexpr double kDefaultVarianceThreshold = 0.95;

/// `retained_k` is the smallest k reaching `variance_threshold` of the total
/// variance unless `fixed_k` is given. Throws for fewer than two rows.
PcaModel pca_fit(const Matrix& x, double variance_threshold = kDefaultVarianceThreshold,
                 std::optional<std::size_t> fixed_k = std::nullopt);
Matrix pca_transform(const PcaModel& model, const Matrix& x);
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& scores);

// ---------------------------------------------------------------------------
// Kernel PCA (RBF)

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// 1 / (d * median pairwise squared distance); 1 / d when all points coincide.
double default_gamma(const Matrix& x);

Matrix rbf_gram(const Matrix& x, double gamma);

/// K - 1K - K1 + 1K1 with 1 the all-(1/n) matrix.
Matrix center_gram(const Matrix& k);

struct KpcaModel {
  Matrix training;
  double gamma = 1.0;
  /// Centered-Gram eigenvalues, descending (all of them).
  std::vector<double> eigenvalues;
  /// Column j is eigenvector j of the centered Gram divided by sqrt(lambda_j);
  /// one column per retained component.
  Matrix alphas;
  std::vector<double> gram_column_mean;
  double gram_total_mean = 0.0;
  /// Scores of the training rows, n x retained_k.
  Matrix training_scores;

  std::size_t retained_k() const noexcept { return alphas.cols(); }
};

inline constexpr double kKpcaEigenFloor = 1e-10;

struct KpcaOptions {
  /// 0 selects components by variance_threshold.
  std::size_t max_components = 0;
  double variance_threshold = kDefaultVarianceThreshold;
};

/// Throws for gamma <= 0 or fewer than two rows.
KpcaModel kpca_fit(const Matrix& x, double gamma, const KpcaOptions& opts = {});
Matrix kpca_transform(const KpcaModel& model, const Matrix& x);

// ---------------------------------------------------------------------------
// Serialization

void write_pca(std::ostream& out, const PcaModel& m);
PcaModel read_pca(std::istream& in);
void write_kpca(std::ostream& out, const KpcaModel& m);
KpcaModel read_kpca(std::istream& in);

}  // namespace enose::feat
