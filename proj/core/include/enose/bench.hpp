#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enose/classify.hpp"
#include "enose/dataset.hpp"
#include "enose/features.hpp"
#include "enose/kv_config.hpp"
#include "enose/preprocess.hpp"
#include "enose/regress.hpp"

namespace enose::bench {

enum class Projection { none, pca, kpca };

std::string_view projection_name(Projection p) noexcept;
std::optional<Projection> parse_projection(std::string_view name);

/// Progress sink: stage name and a short detail line.
using StageLog = std::function<void(std::string_view stage, const std::string& detail)>;

struct PipelineConfig {
  double noise_sigma = sim::kDefaultNoiseSigma;
  sim::StandardProtocol protocol{};
  prep::FilterConfig filter{};
  feat::FeatureConfig features{};
  Projection projection = Projection::pca;
  double pca_variance_threshold = feat::kDefaultVarianceThreshold;
  /// Empty = default_gamma() of the standardized training features.
  std::optional<double> kpca_gamma;
  std::size_t kpca_components = 8;
  svm::SvmParams svm{};
  /// Empty = default_gamma() of the projected training features.
  std::optional<double> svm_gamma;
  mlp::MlpConfig mlp{};

  /// Overrides from `key = value` text; unknown keys are rejected.
  static PipelineConfig from_config(const KeyValueConfig& kv);
  /// Every setting as ordered key/value text, for report headers.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class test quotas by largest remainder, members drawn by a seeded
/// shuffle. Requires labels.size() == n_train + n_test.
Split stratified_split(const std::vector<int>& labels, std::size_t n_train, std::size_t n_test,
                       std::uint64_t seed);

/// simulate -> ingest -> preprocess -> extract, one row per session.
feat::FeatureTable build_feature_table(const sim::ExperimentTable& table, const PipelineConfig& cfg,
                                       std::uint64_t seed, const StageLog& log = {});

/// Standardization plus the configured projection, fitted on training rows.
struct Projector {
  Projection kind = Projection::pca;
  prep::Standardizer scaler;
  std::optional<feat::PcaModel> pca;
  std::optional<feat::KpcaModel> kpca;

  std::size_t output_dim() const;
  Matrix apply(const Matrix& x) const;
};

Projector fit_projector(const Matrix& train, const PipelineConfig& cfg);

struct TestSample {
  std::size_t index = 0;
  int truth = 0;
  int predicted = 0;
  GasMixture mixture;
  /// First two projected coordinates (zero-padded).
  std::array<double, 2> coords{};
};

struct RunReport {
  std::string table;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> notes;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t projected_dim = 0;
  std::vector<int> classes;
  /// confusion[i][j]: true classes[i] predicted as classes[j].
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  double accuracy = 0.0;
  std::vector<TestSample> samples;
  double wall_time_s = 0.0;
};

/// Errors from any stage surface as StageError naming that stage.
RunReport run_experiment(const sim::ExperimentTable& table, const PipelineConfig& cfg, std::uint64_t seed,
                         const StageLog& log = {});
RunReport run_experiment(sim::TableId id, const PipelineConfig& cfg, std::uint64_t seed,
                         const StageLog& log = {});

struct RegressionSample {
  std::size_t index = 0;
  double target_ppm = 0.0;
  double predicted_ppm = 0.0;
};

struct RegressionReport {
  std::string table;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  mlp::RegressionMetrics metrics;
  /// max - min acetone ppm over the whole table.
  double target_range_ppm = 0.0;
  std::vector<double> loss_trace;
  std::vector<RegressionSample> samples;
  double wall_time_s = 0.0;
};

RegressionReport run_regression_experiment(const sim::ExperimentTable& table, const PipelineConfig& cfg,
                                           std::uint64_t seed, const StageLog& log = {});
RegressionReport run_regression_experiment(sim::TableId id, const PipelineConfig& cfg, std::uint64_t seed,
                                           const StageLog& log = {});

}  // namespace enose::bench
