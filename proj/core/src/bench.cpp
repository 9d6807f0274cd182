#include "enose/bench.hpp"

#include "enose/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace enose::bench {

std::string_view projection_name(Projection p) noexcept {
  switch (p) {
    case Projection::none: return "none";
    case Projection::pca: return "pca";
    case Projection::kpca: return "kpca";
  }
  return "unknown";
}

std::optional<Projection> parse_projection(std::string_view name) {
  for (Projection p : {Projection::none, Projection::pca, Projection::kpca})
    if (name == projection_name(p)) return p;
  return std::nullopt;
}

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void note(const StageLog& log, std::string_view name, const std::string& detail) {
  if (log) log(name, detail);
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  static const std::set<std::string> known{
      "noise_sigma",       "pre_air_s",        "exposure_s",        "recovery_s",
      "sample_rate_hz",    "window_m",         "baseline_degree",   "recovery_anchor_s",
      "steady_fraction",   "features",         "pca_variance",      "kpca_gamma",
      "kpca_components",   "svm_c",            "svm_kernel",        "svm_gamma",
      "svm_tol",           "svm_max_passes",   "mlp_hidden",        "mlp_lr",
      "mlp_epochs",        "mlp_seed",         "mlp_patience"};
  for (const auto& [k, v] : kv.entries())
    if (!known.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");

  PipelineConfig c;
  c.noise_sigma = kv.get_double("noise_sigma", c.noise_sigma);
  c.protocol.pre_air_s = kv.get_double("pre_air_s", c.protocol.pre_air_s);
  c.protocol.exposure_s = kv.get_double("exposure_s", c.protocol.exposure_s);
  c.protocol.recovery_s = kv.get_double("recovery_s", c.protocol.recovery_s);
  c.protocol.sample_rate_hz = kv.get_double("sample_rate_hz", c.protocol.sample_rate_hz);
  c.filter.window_m = static_cast<int>(kv.get_int("window_m", c.filter.window_m));
  c.filter.baseline_degree = static_cast<int>(kv.get_int("baseline_degree", c.filter.baseline_degree));
  c.filter.recovery_anchor_s = kv.get_double("recovery_anchor_s", c.filter.recovery_anchor_s);
  c.features.steady_fraction = kv.get_double("steady_fraction", c.features.steady_fraction);
  if (kv.contains("features")) {
    const auto p = parse_projection(kv.get_string("features", ""));
    if (!p) throw std::invalid_argument("config: features must be none|pca|kpca");
    c.projection = *p;
  }
  c.pca_variance_threshold = kv.get_double("pca_variance", c.pca_variance_threshold);
  if (kv.contains("kpca_gamma") && kv.get_string("kpca_gamma", "") != "auto")
    c.kpca_gamma = kv.get_double("kpca_gamma", 0.0);
  c.kpca_components = static_cast<std::size_t>(kv.get_int("kpca_components", static_cast<std::int64_t>(c.kpca_components)));
  c.svm.c_penalty = kv.get_double("svm_c", c.svm.c_penalty);
  if (kv.contains("svm_kernel")) {
    const auto k = kv.get_string("svm_kernel", "");
    if (k != "linear" && k != "rbf") throw std::invalid_argument("config: svm_kernel must be linear|rbf");
    c.svm.kernel.type = k == "linear" ? svm::KernelType::linear : svm::KernelType::rbf;
  }
  if (kv.contains("svm_gamma") && kv.get_string("svm_gamma", "") != "auto")
    c.svm_gamma = kv.get_double("svm_gamma", 0.0);
  c.svm.tol = kv.get_double("svm_tol", c.svm.tol);
  c.svm.max_passes = static_cast<int>(kv.get_int("svm_max_passes", c.svm.max_passes));
  if (kv.contains("mlp_hidden")) {
    c.mlp.hidden_layers.clear();
    for (int h : kv.get_int_list("mlp_hidden", {})) {
      if (h < 1) throw std::invalid_argument("config: mlp_hidden sizes must be >= 1");
      c.mlp.hidden_layers.push_back(static_cast<std::size_t>(h));
    }
  }
  c.mlp.learning_rate = kv.get_double("mlp_lr", c.mlp.learning_rate);
  c.mlp.epochs = static_cast<int>(kv.get_int("mlp_epochs", c.mlp.epochs));
  c.mlp.seed = static_cast<std::uint64_t>(kv.get_int("mlp_seed", static_cast<std::int64_t>(c.mlp.seed)));
  c.mlp.patience = static_cast<int>(kv.get_int("mlp_patience", c.mlp.patience));
  return c;
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::echo() const {
  return {
      {"noise_sigma", format_double(noise_sigma)},
      {"pre_air_s", format_double(protocol.pre_air_s)},
      {"exposure_s", format_double(protocol.exposure_s)},
      {"recovery_s", format_double(protocol.recovery_s)},
      {"sample_rate_hz", format_double(protocol.sample_rate_hz)},
      {"window_m", std::to_string(filter.window_m)},
      {"baseline_degree", std::to_string(filter.baseline_degree)},
      {"recovery_anchor_s", format_double(filter.recovery_anchor_s)},
      {"steady_fraction", format_double(features.steady_fraction)},
      {"features", std::string(projection_name(projection))},
      {"pca_variance", format_double(pca_variance_threshold)},
      {"kpca_gamma", kpca_gamma ? format_double(*kpca_gamma) : "auto"},
      {"kpca_components", std::to_string(kpca_components)},
      {"svm_c", format_double(svm.c_penalty)},
      {"svm_kernel", svm.kernel.type == svm::KernelType::linear ? "linear" : "rbf"},
      {"svm_gamma", svm_gamma ? format_double(*svm_gamma) : "auto"},
      {"svm_tol", format_double(svm.tol)},
      {"svm_max_passes", std::to_string(svm.max_passes)},
      {"mlp_hidden", join_sizes(mlp.hidden_layers)},
      {"mlp_lr", format_double(mlp.learning_rate)},
      {"mlp_epochs", std::to_string(mlp.epochs)},
      {"mlp_seed", std::to_string(mlp.seed)},
      {"mlp_patience", std::to_string(mlp.patience)},
  };
}

Split stratified_split(const std::vector<int>& labels, std::size_t n_train, std::size_t n_test,
                       std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n != n_train + n_test)
    throw std::invalid_argument("stratified_split: " + std::to_string(n) + " samples for a " +
                                std::to_string(n_train) + "/" + std::to_string(n_test) + " split");
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<std::vector<std::size_t>> members(classes.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin();
    members[static_cast<std::size_t>(c)].push_back(i);
  }

  // Largest-remainder quotas; remainder ties go to the lower class code.
  std::vector<std::size_t> quota(classes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double exact = static_cast<double>(n_test) * static_cast<double>(members[c].size()) / static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n_test; ++k, ++assigned) ++quota[remainders[k % remainders.size()].second];

  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  Split split;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto m = members[c];
    std::shuffle(m.begin(), m.end(), rng);
    for (std::size_t k = 0; k < m.size(); ++k) (k < quota[c] ? split.test : split.train).push_back(m[k]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

feat::FeatureTable build_feature_table(const sim::ExperimentTable& table, const PipelineConfig& cfg,
                                       std::uint64_t seed, const StageLog& log) {
  sim::DatasetOptions opts;
  opts.sensors = sim::default_sensor_array(cfg.noise_sigma);
  opts.protocol = cfg.protocol;

  const auto sessions = stage("simulate", [&] {
    return sim::generate_dataset(table, sim::allocate_rows(table.total(), table.rows.size()), seed, opts);
  });
  note(log, "simulate", std::to_string(sessions.size()) + " sessions of table " + table.name);

  feat::FeatureTable out;
  out.x = Matrix(sessions.size(), feat::kFeatureDim);
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& src = sessions[i].session;
    // Round-trip through the wire format so ingestion is exercised end to end.
    acq::Session ingested = stage("ingest", [&] {
      std::istringstream wire(acq::session_csv_string(src));
      return acq::parse_stream(wire).session;
    });
    ingested.meta = src.meta;
    const auto processed = stage("preprocess", [&] { return prep::preprocess_session(ingested, cfg.filter); });
    const auto f = stage("extract", [&] { return feat::extract_features(processed, cfg.features); });
    std::copy(f.values.begin(), f.values.end(), out.x.row(i).begin());
    out.labels.push_back(f.label);
    out.mixtures.push_back(f.mixture);
  }
  note(log, "ingest", std::to_string(sessions.size()) + " sessions parsed");
  note(log, "preprocess", "window_m=" + std::to_string(cfg.filter.window_m) +
                              " baseline_degree=" + std::to_string(cfg.filter.baseline_degree));
  note(log, "extract", std::to_string(out.x.rows()) + "x" + std::to_string(out.x.cols()) + " feature matrix");
  return out;
}

std::size_t Projector::output_dim() const {
  switch (kind) {
    case Projection::none: return scaler.dim();
    case Projection::pca: return pca->retained_k;
    case Projection::kpca: return kpca->retained_k();
  }
  return 0;
}

Matrix Projector::apply(const Matrix& x) const {
  const Matrix z = scaler.apply(x);
  switch (kind) {
    case Projection::none: return z;
    case Projection::pca: return feat::pca_transform(*pca, z);
    case Projection::kpca: return feat::kpca_transform(*kpca, z);
  }
  return z;
}

Projector fit_projector(const Matrix& train, const PipelineConfig& cfg) {
  Projector p;
  p.kind = cfg.projection;
  p.scaler = prep::fit_standardizer(train);
  const Matrix z = p.scaler.apply(train);
  if (p.kind == Projection::pca) {
    p.pca = feat::pca_fit(z, cfg.pca_variance_threshold);
  } else if (p.kind == Projection::kpca) {
    const double gamma = cfg.kpca_gamma.value_or(feat::default_gamma(z));
    feat::KpcaOptions opts;
    opts.max_components = cfg.kpca_components;
    p.kpca = feat::kpca_fit(z, gamma, opts);
    if (p.kpca->retained_k() == 0) throw std::runtime_error("kernel PCA retained no components");
  }
  return p;
}

namespace {

struct Prepared {
  feat::FeatureTable data;
  Split split;
  Projector projector;
  Matrix train_x;
  Matrix test_x;
};

Prepared prepare(const sim::ExperimentTable& table, const PipelineConfig& cfg, std::uint64_t seed,
                 const StageLog& log) {
  Prepared p;
  p.data = build_feature_table(table, cfg, seed, log);
  p.split = stage("split", [&] { return stratified_split(p.data.labels, table.n_train, table.n_test, seed); });
  note(log, "split", std::to_string(p.split.train.size()) + " train / " + std::to_string(p.split.test.size()) + " test");
  const auto train = p.data.subset(p.split.train);
  const auto test = p.data.subset(p.split.test);
  p.projector = stage("project", [&] { return fit_projector(train.x, cfg); });
  p.train_x = p.projector.apply(train.x);
  p.test_x = p.projector.apply(test.x);
  note(log, "project", std::string(projection_name(cfg.projection)) + " to " +
                           std::to_string(p.projector.output_dim()) + " dimensions");
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunReport run_experiment(const sim::ExperimentTable& table, const PipelineConfig& cfg, std::uint64_t seed,
                         const StageLog& log) {
  const auto t0 = std::chrono::steady_clock::now();
  Prepared p = prepare(table, cfg, seed, log);

  std::vector<int> train_labels, test_labels;
  for (auto i : p.split.train) train_labels.push_back(p.data.labels[i]);
  for (auto i : p.split.test) test_labels.push_back(p.data.labels[i]);

  const auto bundle = stage("train-svm", [&] {
    ClassifierBundle cb;
    cb.projector = p.projector;
    svm::SvmParams params = cfg.svm;
    if (params.kernel.type == svm::KernelType::rbf)
      params.kernel.gamma = cfg.svm_gamma.value_or(feat::default_gamma(p.train_x));
    cb.svm = svm::svm_train_multiclass(p.train_x, train_labels, params);
    return cb;
  });
  const double gamma_used = bundle.svm.pairs.front().model.kernel.gamma;
  note(log, "train-svm", std::to_string(bundle.svm.pairs.size()) + " pairwise models, gamma " +
                             format_double(gamma_used));
  const auto predicted = stage("classify", [&] { return svm::svm_predict(bundle.svm, p.test_x); });

  RunReport r;
  r.table = table.name;
  r.seed = seed;
  r.config = cfg.echo();
  r.config.emplace_back("svm_gamma_used", format_double(gamma_used));
  r.notes = table.notes;
  r.n_train = p.split.train.size();
  r.n_test = p.split.test.size();
  r.projected_dim = p.projector.output_dim();
  score_classification(r, test_labels, predicted);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    TestSample s;
    s.index = p.split.test[i];
    s.truth = test_labels[i];
    s.predicted = predicted[i];
    s.mixture = p.data.mixtures[s.index];
    for (std::size_t d = 0; d < 2 && d < p.test_x.cols(); ++d) s.coords[d] = p.test_x(i, d);
    r.samples.push_back(s);
  }
  r.wall_time_s = seconds_since(t0);
  note(log, "classify", "accuracy " + format_double(r.accuracy) + " on " + std::to_string(r.n_test) + " samples");
  return r;
}

RunReport run_experiment(sim::TableId id, const PipelineConfig& cfg, std::uint64_t seed, const StageLog& log) {
  return run_experiment(sim::builtin_table(id), cfg, seed, log);
}

RegressionReport run_regression_experiment(const sim::ExperimentTable& table, const PipelineConfig& cfg,
                                           std::uint64_t seed, const StageLog& log) {
  const auto t0 = std::chrono::steady_clock::now();
  Prepared p = prepare(table, cfg, seed, log);

  std::vector<double> train_y, test_y;
  for (auto i : p.split.train) train_y.push_back(p.data.mixtures[i].acetone_ppm);
  for (auto i : p.split.test) test_y.push_back(p.data.mixtures[i].acetone_ppm);

  mlp::MlpConfig mc = cfg.mlp;
  mc.input_dim = p.train_x.cols();
  const auto model = stage("train-mlp", [&] { return mlp::mlp_train(p.train_x, train_y, mc); });
  note(log, "train-mlp", std::to_string(model.loss_trace.size()) + " epochs");
  const auto predicted = stage("predict", [&] { return mlp::mlp_predict(model, p.test_x); });

  RegressionReport r;
  r.table = table.name;
  r.seed = seed;
  r.config = cfg.echo();
  r.n_train = p.split.train.size();
  r.n_test = p.split.test.size();
  r.metrics = mlp::evaluate_regression(predicted, test_y);
  const auto all = p.data.acetone_targets();
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  r.target_range_ppm = *hi - *lo;
  r.loss_trace = model.loss_trace;
  for (std::size_t i = 0; i < predicted.size(); ++i) r.samples.push_back({p.split.test[i], test_y[i], predicted[i]});
  r.wall_time_s = seconds_since(t0);
  note(log, "predict", "rmse " + format_double(r.metrics.rmse) + " ppm on " + std::to_string(r.n_test) + " samples");
  return r;
}

RegressionReport run_regression_experiment(sim::TableId id, const PipelineConfig& cfg, std::uint64_t seed,
                                           const StageLog& log) {
  return run_regression_experiment(sim::builtin_table(id), cfg, seed, log);
}

}  // namespace enose::bench
