#include <cmath>
#include <random>
#include <sstream>

#include "checks.hpp"
#include "doctest.h"
#include "enose/regress.hpp"

using namespace enose;
using namespace enose::mlp;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Layer layer(std::vector<std::vector<double>> w, std::vector<double> b) { return {Matrix::from_rows(w), std::move(b)}; }

MlpModel identity_scaled(Network net, std::size_t dim) {
  MlpModel m;
  m.network = std::move(net);
  m.input_scaler.mean.assign(dim, 0.0);
  m.input_scaler.stddev.assign(dim, 1.0);
  m.input_scaler.constant.assign(dim, false);
  return m;
}

MlpConfig config_1d(std::vector<std::size_t> hidden, double lr, int epochs) {
  MlpConfig c;
  c.input_dim = 1;
  c.hidden_layers = std::move(hidden);
  c.learning_rate = lr;
  c.epochs = epochs;
  c.seed = 5;
  return c;
}

Matrix column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(MlpConfig{}.validate());
  MlpConfig c;
  c.learning_rate = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.hidden_layers = {4, 0};
  CHECK_THROWS(c.validate());
  c = {};
  c.input_dim = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("single hidden unit forward pass by hand") {
  Network net;
  net.layers = {layer({{2.0}}, {-1.0}), layer({{3.0}}, {0.5})};
  const std::vector<double> x{0.7};
  const double expected = 3.0 * sigmoid(2.0 * 0.7 - 1.0) + 0.5;
  CHECK(std::abs(net.forward(x) - expected) < 1e-12);

  auto m = identity_scaled(net, 1);
  m.target_min = 10.0;
  m.target_span = 4.0;
  CHECK(std::abs(mlp_forward(m, x) - (10.0 + 4.0 * expected)) < 1e-12);
  CHECK(mlp_forward(m, x) == mlp_forward(m, x));
  CHECK_THROWS(mlp_forward(m, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("two hidden layers by hand") {
  Network net;
  net.layers = {layer({{1.0, -1.0}, {0.5, 2.0}}, {0.1, -0.2}), layer({{1.5, -0.5}}, {0.3}), layer({{-2.0}}, {1.0})};
  const std::vector<double> x{0.4, -0.3};
  const double h1 = sigmoid(0.4 + 0.3 + 0.1), h2 = sigmoid(0.2 - 0.6 - 0.2);
  const double g = sigmoid(1.5 * h1 - 0.5 * h2 + 0.3);
  CHECK(std::abs(net.forward(x) - (-2.0 * g + 1.0)) < 1e-12);
  CHECK(net.parameter_count() == 6 + 3 + 2);
}

TEST_CASE("zero network returns the target offset") {
  auto net = init_network(12, std::vector<std::size_t>{16}, 1);
  net.set_parameters(std::vector<double>(net.parameter_count(), 0.0));
  auto m = identity_scaled(net, 12);
  m.target_min = 0.0;
  m.target_span = 7.0;
  CHECK(mlp_forward(m, std::vector<double>(12, 3.0)) == 0.0);
  m.target_min = 2.5;
  CHECK(mlp_forward(m, std::vector<double>(12, -1.0)) == 2.5);
}

TEST_CASE("initialization bounds and parameter layout") {
  const std::vector<std::size_t> hidden{8, 4};
  const auto net = init_network(12, hidden, 3);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].weights.rows() == 8);
  CHECK(net.layers[0].weights.cols() == 12);
  CHECK(net.layers[1].weights.cols() == 8);
  CHECK(net.layers[2].weights.rows() == 1);
  for (const auto& l : net.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weights.cols()));
    for (double w : l.weights.data()) CHECK(std::abs(w) <= bound);
    for (double b : l.bias) CHECK(std::abs(b) <= bound);
  }
  CHECK(net.parameter_count() == 12 * 8 + 8 + 8 * 4 + 4 + 4 + 1);
  auto copy = net;
  const auto p = net.parameters();
  copy.set_parameters(p);
  CHECK(copy.parameters() == p);
  CHECK(net.parameters()[0] == net.layers[0].weights(0, 0));
  CHECK(net.parameters()[12 * 8] == net.layers[0].bias[0]);
  CHECK_THROWS(copy.set_parameters(std::vector<double>(3, 0.0)));
  CHECK(init_network(12, hidden, 3).parameters() == p);
}

TEST_CASE("analytic gradient agrees with central differences") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) CHECK(checks::gradient_check_trial(rng) < 1e-4);
  CHECK(checks::gradient_check_trial(rng, 3, {5, 4}) < 1e-4);
}

TEST_CASE("constant targets give a constant predictor") {
  std::mt19937_64 rng(32);
  const Matrix x = checks::gaussian_matrix(rng, 30, 2);
  auto cfg = config_1d({8}, 0.2, 5000);
  cfg.input_dim = 2;
  const std::vector<double> t(30, 42.0);
  const auto m = mlp_train(x, t, cfg);
  CHECK(m.loss_trace.back() < 1e-6);
  for (double p : mlp_predict(m, x)) CHECK(std::abs(p - 42.0) < 1e-2);
}

TEST_CASE("noiseless linear map") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    xs.push_back(i / 20.0);
    ys.push_back(2.0 * i / 20.0);
  }
  const auto m = mlp_train(column(xs), ys, config_1d({16}, 0.01, 5000));
  const auto p = mlp_predict(m, column(xs));
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(p[i] - ys[i]));
  CHECK(worst < 0.02 * 2.0);
}

TEST_CASE("loss is finite and non-increasing at a small learning rate") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    xs.push_back(i / 20.0);
    ys.push_back(2.0 * i / 20.0);
  }
  const auto m = mlp_train(column(xs), ys, config_1d({16}, 1e-3, 400));
  REQUIRE(m.loss_trace.size() > 10);
  for (double l : m.loss_trace) CHECK(std::isfinite(l));
  for (std::size_t e = 10; e < m.loss_trace.size(); ++e) CHECK(m.loss_trace[e] <= m.loss_trace[e - 1] + 1e-9);
}

TEST_CASE("training stops after a plateau") {
  const std::vector<double> xs{0.0, 0.5, 1.0}, ys{0.0, 1.0, 2.0};
  auto cfg = config_1d({4}, 0.01, 1000);
  cfg.min_improvement = 1.0;
  cfg.patience = 3;
  CHECK(mlp_train(column(xs), ys, cfg).loss_trace.size() == 4);
  cfg.min_improvement = 0.0;
  cfg.epochs = 7;
  CHECK(mlp_train(column(xs), ys, cfg).loss_trace.size() == 7);
  cfg.patience = 0;
  CHECK_THROWS(mlp_train(column(xs), ys, cfg));
}

TEST_CASE("training is deterministic") {
  std::mt19937_64 rng(33);
  const Matrix x = checks::gaussian_matrix(rng, 40, 12);
  std::vector<double> t(40);
  for (std::size_t i = 0; i < 40; ++i) t[i] = 10.0 * x(i, 0) + x(i, 3);
  MlpConfig cfg;
  cfg.epochs = 50;
  const auto a = mlp_train(x, t, cfg);
  const auto b = mlp_train(x, t, cfg);
  CHECK(a.network.parameters() == b.network.parameters());
  CHECK(a.loss_trace == b.loss_trace);
  cfg.seed = 2;
  CHECK(mlp_train(x, t, cfg).network.parameters() != a.network.parameters());
}

TEST_CASE("a runaway learning rate is reported") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i);
    ys.push_back(i * i);
  }
  try {
    mlp_train(column(xs), ys, config_1d({16}, 1e6, 100));
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch() >= 1);
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("training input errors") {
  const Matrix x = column({1.0, 2.0});
  CHECK_THROWS(mlp_train(Matrix(0, 1), std::vector<double>{}, config_1d({4}, 0.1, 1)));
  CHECK_THROWS(mlp_train(x, std::vector<double>{1.0}, config_1d({4}, 0.1, 1)));
  CHECK_THROWS(mlp_train(x, std::vector<double>{1.0, std::nan("")}, config_1d({4}, 0.1, 1)));
  CHECK_THROWS(mlp_train(x, std::vector<double>{1.0, 2.0}, MlpConfig{}));
}

TEST_CASE("regression metrics") {
  const std::vector<double> t{1, 2, 3};
  auto m = evaluate_regression(std::vector<double>{1, 2, 4}, t);
  CHECK(m.rmse == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
  CHECK(m.mae == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  REQUIRE(m.r2);
  CHECK(*m.r2 == doctest::Approx(0.5).epsilon(1e-15));

  m = evaluate_regression(t, t);
  CHECK(m.rmse == 0.0);
  CHECK(m.mae == 0.0);
  CHECK(*m.r2 == 1.0);

  m = evaluate_regression(std::vector<double>{2, 2, 2}, t);
  CHECK(*m.r2 == 0.0);

  m = evaluate_regression(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5});
  CHECK_FALSE(m.r2.has_value());
  CHECK(m.mae == 3.0);
  CHECK_THROWS(evaluate_regression(std::vector<double>{}, std::vector<double>{}));
  CHECK_THROWS(evaluate_regression(std::vector<double>{1}, t));
}

TEST_CASE("model text round trip") {
  std::mt19937_64 rng(34);
  const Matrix x = checks::gaussian_matrix(rng, 25, 12);
  std::vector<double> t(25);
  for (std::size_t i = 0; i < 25; ++i) t[i] = 50.0 + 20.0 * x(i, 2);
  MlpConfig cfg;
  cfg.hidden_layers = {6, 3};
  cfg.epochs = 20;
  const auto m = mlp_train(x, t, cfg);
  std::stringstream ss;
  write_mlp(ss, m);
  const auto back = read_mlp(ss);
  CHECK(mlp_predict(back, x) == mlp_predict(m, x));
  CHECK(back.loss_trace == m.loss_trace);
  std::istringstream bad("not a model\n");
  CHECK_THROWS(read_mlp(bad));
}
