#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "enose/linalg.hpp"
#include "enose/preprocess.hpp"

namespace enose::mlp {

struct MlpConfig {
  std::size_t input_dim = 12;
  std::vector<std::size_t> hidden_layers{16};
  double learning_rate = 0.01;
  int epochs = 2000;
  std::uint64_t seed = 1;
  /// Training stops once the best epoch loss has improved by less than
  /// `min_improvement` for `patience` consecutive epochs.
  double min_improvement = 1e-9;
  int patience = 20;

  void validate() const;
};

/// Weights are (out x in), biases have length out.
struct Layer {
  Matrix weights;
  std::vector<double> bias;
};

/// Sigmoid hidden layers and an identity output over standardized inputs;
/// the output is in min-max scaled target units.
struct Network {
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weights.cols(); }
  std::size_t parameter_count() const;
  double forward(std::span<const double> x) const;

  /// Flattened parameters, layer by layer: weights row-major, then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> p);
};

/// Uniform in +-1/sqrt(fan_in).
Network init_network(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed);

/// Mean over rows of 1/2 (net(x) - t)^2 and its gradient in parameters() order.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossGradient loss_and_gradient(const Network& net, const Matrix& x, std::span<const double> targets);

struct MlpModel {
  Network network;
  prep::Standardizer input_scaler;
  double target_min = 0.0;
  /// max - min, or 1 when all targets are equal.
  double target_span = 1.0;
  /// Mean squared error in scaled units after each epoch.
  std::vector<double> loss_trace;
};

/// Thrown when the loss becomes non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, int epoch) : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Predicted acetone concentration in ppm.
double mlp_forward(const MlpModel& model, std::span<const double> x);
std::vector<double> mlp_predict(const MlpModel& model, const Matrix& x);

/// Per-sample SGD on squared error, epoch order shuffled from `config.seed`.
MlpModel mlp_train(const Matrix& x, std::span<const double> targets_ppm, const MlpConfig& config);

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  /// Undefined when the targets have zero variance.
  std::optional<double> r2;
};

RegressionMetrics evaluate_regression(std::span<const double> predictions, std::span<const double> targets);
RegressionMetrics evaluate_regression(const MlpModel& model, const Matrix& x, std::span<const double> targets);

void write_mlp(std::ostream& out, const MlpModel& m);
MlpModel read_mlp(std::istream& in);

}  // namespace enose::mlp
