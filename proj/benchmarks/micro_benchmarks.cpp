#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "enose/acquisition.hpp"
#include "enose/bench.hpp"
#include "enose/classify.hpp"
#include "enose/dataset.hpp"
#include "enose/features.hpp"
#include "enose/preprocess.hpp"
#include "enose/regress.hpp"

using namespace enose;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, d);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

const acq::Session& sample_session() {
  static const acq::Session s =
      sim::simulate_labeled_session(sim::default_sensor_array(), sim::StandardProtocol{}, {50, 5, 0}, 7);
  return s;
}

}  // namespace

static void BM_SimulateSession(benchmark::State& state) {
  const auto sensors = sim::default_sensor_array();
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sim::simulate_labeled_session(sensors, sim::StandardProtocol{}, {50, 5, 0}, ++seed));
}
BENCHMARK(BM_SimulateSession);

static void BM_ParseSession(benchmark::State& state) {
  const std::string text = acq::session_csv_string(sample_session());
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(acq::parse_stream(in));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseSession);

static void BM_PreprocessSession(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(prep::preprocess_session(sample_session(), prep::FilterConfig{}));
}
BENCHMARK(BM_PreprocessSession);

static void BM_MovingAverage(benchmark::State& state) {
  const auto x = random_matrix(1, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(prep::moving_average(x.data(), 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MovingAverage)->Arg(1000)->Arg(100000);

static void BM_ExtractFeatures(benchmark::State& state) {
  const auto p = prep::preprocess_session(sample_session(), prep::FilterConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(feat::extract_features(p));
}
BENCHMARK(BM_ExtractFeatures);

static void BM_PcaFit(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 12, 2);
  for (auto _ : state) benchmark::DoNotOptimize(feat::pca_fit(x));
}
BENCHMARK(BM_PcaFit)->Arg(100)->Arg(700);

static void BM_KpcaFit(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 12, 3);
  const double gamma = feat::default_gamma(x);
  for (auto _ : state) benchmark::DoNotOptimize(feat::kpca_fit(x, gamma));
}
BENCHMARK(BM_KpcaFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SvmTrainBinary(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  auto x = random_matrix(n, 4, 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2 ? 1 : -1;
    x(i, 0) += 1.5 * y[i];
  }
  svm::SvmParams p;
  p.kernel.gamma = 0.25;
  for (auto _ : state) benchmark::DoNotOptimize(svm::svm_train_binary(x, y, p));
}
BENCHMARK(BM_SvmTrainBinary)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

static void BM_MlpEpochs(benchmark::State& state) {
  const auto x = random_matrix(600, 12, 5);
  std::vector<double> t(600);
  for (std::size_t i = 0; i < 600; ++i) t[i] = 50.0 + 10.0 * x(i, 0);
  mlp::MlpConfig cfg;
  cfg.epochs = 10;
  cfg.min_improvement = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(mlp::mlp_train(x, t, cfg));
}
BENCHMARK(BM_MlpEpochs)->Unit(benchmark::kMillisecond);

static void BM_RunExperiment(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(bench::run_experiment(sim::TableId::binary_ethanol, bench::PipelineConfig{}, 42));
}
BENCHMARK(BM_RunExperiment)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
