// enose command-line front end.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "enose/bench.hpp"
#include "enose/models.hpp"
#include "enose/report.hpp"
#include "enose/sim_config.hpp"

namespace fs = std::filesystem;
using namespace enose;

namespace {

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_meta_file(const fs::path& csv, const acq::SessionMeta& meta) {
  auto out = open_out(acq::meta_path_for(csv));
  acq::write_meta(out, meta);
}

acq::SessionMeta read_meta_file(const fs::path& csv) {
  const auto p = acq::meta_path_for(csv);
  if (!fs::exists(p)) throw std::runtime_error("missing metadata file " + p.string());
  auto in = open_in(p);
  return acq::read_meta(in);
}

// Directories expand to their *.csv files in name order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a))
        if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  if (out.empty()) throw std::runtime_error("no input files");
  return out;
}

feat::FeatureTable load_features(const fs::path& p) {
  auto in = open_in(p);
  return feat::read_feature_csv(in);
}

void log_stage(std::string_view stage, const std::string& detail) {
  std::cerr << "[" << stage << "] " << detail << '\n';
}

bench::PipelineConfig load_pipeline(const std::string& config_path) {
  if (config_path.empty()) return {};
  return bench::PipelineConfig::from_config(KeyValueConfig::load(config_path));
}

struct FilterArgs {
  int window_m = prep::FilterConfig{}.window_m;
  int baseline_degree = prep::FilterConfig{}.baseline_degree;

  prep::FilterConfig config() const {
    prep::FilterConfig f;
    f.window_m = window_m;
    f.baseline_degree = baseline_degree;
    f.validate();
    return f;
  }
};

void add_filter_options(CLI::App* cmd, FilterArgs& f) {
  cmd->add_option("--window", f.window_m, "Moving-average window (odd)")->capture_default_str();
  cmd->add_option("--degree", f.baseline_degree, "Baseline polynomial degree")->capture_default_str();
}

bool is_processed_file(const fs::path& p) {
  auto in = open_in(p);
  std::string first;
  std::getline(in, first);
  return first.rfind("# processed", 0) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gas sensor array simulation and analysis"};
  app.require_subcommand(1);
  std::string stage_name;

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate sessions");
  std::string sim_config, sim_out, sim_table;
  double sim_acetone = 0, sim_ethanol = 0, sim_methanol = 0;
  std::uint64_t sim_seed = 1;
  std::optional<double> sim_noise;
  sim_cmd->add_option("--config", sim_config, "Simulator key = value file");
  sim_cmd->add_option("--table", sim_table, "Generate a whole table: binary-ethanol|binary-methanol|ternary");
  sim_cmd->add_option("--acetone", sim_acetone, "Acetone ppm");
  sim_cmd->add_option("--ethanol", sim_ethanol, "Ethanol ppm");
  sim_cmd->add_option("--methanol", sim_methanol, "Methanol ppm");
  sim_cmd->add_option("--seed", sim_seed, "Random seed");
  sim_cmd->add_option("--noise", sim_noise, "Noise sigma for every channel");
  sim_cmd->add_option("--out", sim_out, "Session CSV, or directory with --table")->required();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a raw frame log into a clean session CSV");
  std::string ingest_in, ingest_out, ingest_meta;
  ingest_cmd->add_option("--in", ingest_in, "Raw CSV log")->required();
  ingest_cmd->add_option("--meta", ingest_meta, "Metadata file (default: sidecar of --in)");
  ingest_cmd->add_option("--out", ingest_out, "Clean session CSV")->required();

  // preprocess
  auto* prep_cmd = app.add_subcommand("preprocess", "Baseline removal and smoothing");
  std::string prep_in, prep_out;
  FilterArgs prep_filter;
  prep_cmd->add_option("--in", prep_in, "Session CSV")->required();
  prep_cmd->add_option("--out", prep_out, "Processed CSV")->required();
  add_filter_options(prep_cmd, prep_filter);

  // features
  auto* feat_cmd = app.add_subcommand("features", "Extract feature rows from sessions");
  std::vector<std::string> feat_in;
  std::string feat_out;
  FilterArgs feat_filter;
  double feat_steady = feat::FeatureConfig{}.steady_fraction;
  feat_cmd->add_option("--in", feat_in, "Session or processed CSVs, or directories")->required();
  feat_cmd->add_option("--out", feat_out, "Feature CSV")->required();
  feat_cmd->add_option("--steady-fraction", feat_steady, "Tail fraction of exposure averaged as steady state")
      ->capture_default_str();
  add_filter_options(feat_cmd, feat_filter);

  // train-svm
  auto* tsvm_cmd = app.add_subcommand("train-svm", "Train the projection and SVM classifier");
  std::string tsvm_in, tsvm_model, tsvm_kernel = "rbf", tsvm_gamma = "auto", tsvm_features = "pca", tsvm_config;
  double tsvm_c = svm::SvmParams{}.c_penalty;
  tsvm_cmd->add_option("--in", tsvm_in, "Feature CSV")->required();
  tsvm_cmd->add_option("--model", tsvm_model, "Output model file")->required();
  tsvm_cmd->add_option("--c", tsvm_c, "Soft-margin penalty")->capture_default_str();
  tsvm_cmd->add_option("--kernel", tsvm_kernel, "linear|rbf")->capture_default_str()
      ->check(CLI::IsMember({"linear", "rbf"}));
  tsvm_cmd->add_option("--gamma", tsvm_gamma, "RBF gamma or 'auto'")->capture_default_str();
  tsvm_cmd->add_option("--features", tsvm_features, "none|pca|kpca")->capture_default_str()
      ->check(CLI::IsMember({"none", "pca", "kpca"}));
  tsvm_cmd->add_option("--config", tsvm_config, "Pipeline key = value file");

  // classify
  auto* cls_cmd = app.add_subcommand("classify", "Classify feature rows with a trained model");
  std::string cls_model, cls_in, cls_report, cls_predictions;
  cls_cmd->add_option("--model", cls_model, "Model file")->required();
  cls_cmd->add_option("--in", cls_in, "Feature CSV")->required();
  cls_cmd->add_option("--report", cls_report, "Report CSV")->required();
  cls_cmd->add_option("--predictions", cls_predictions, "Per-row predictions CSV");

  // train-mlp
  auto* tmlp_cmd = app.add_subcommand("train-mlp", "Train the acetone concentration regressor");
  std::string tmlp_in, tmlp_model, tmlp_features = "pca", tmlp_trace, tmlp_config;
  std::vector<std::size_t> tmlp_hidden;
  std::optional<double> tmlp_lr;
  std::optional<int> tmlp_epochs;
  std::optional<std::uint64_t> tmlp_seed;
  tmlp_cmd->add_option("--in", tmlp_in, "Feature CSV")->required();
  tmlp_cmd->add_option("--model", tmlp_model, "Output model file")->required();
  tmlp_cmd->add_option("--hidden", tmlp_hidden, "Hidden layer sizes");
  tmlp_cmd->add_option("--lr", tmlp_lr, "Learning rate");
  tmlp_cmd->add_option("--epochs", tmlp_epochs, "Epoch limit");
  tmlp_cmd->add_option("--seed", tmlp_seed, "Initialisation and shuffle seed");
  tmlp_cmd->add_option("--features", tmlp_features, "none|pca|kpca")->capture_default_str()
      ->check(CLI::IsMember({"none", "pca", "kpca"}));
  tmlp_cmd->add_option("--loss-trace", tmlp_trace, "Loss trace CSV");
  tmlp_cmd->add_option("--config", tmlp_config, "Pipeline key = value file");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Predict acetone ppm with a trained regressor");
  std::string pred_model, pred_in, pred_out, pred_report;
  pred_cmd->add_option("--model", pred_model, "Model file")->required();
  pred_cmd->add_option("--in", pred_in, "Feature CSV")->required();
  pred_cmd->add_option("--out", pred_out, "Predictions CSV")->required();
  pred_cmd->add_option("--report", pred_report, "Metrics CSV");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run a full mixture experiment");
  std::string bench_table, bench_out, bench_features, bench_config;
  std::uint64_t bench_seed = 42;
  std::optional<double> bench_noise;
  bool bench_regression = false;
  bench_cmd->add_option("--table", bench_table, "binary-ethanol|binary-methanol|ternary")->required();
  bench_cmd->add_option("--seed", bench_seed, "Experiment seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Report directory")->required();
  bench_cmd->add_option("--features", bench_features, "pca|kpca|none")->check(CLI::IsMember({"none", "pca", "kpca"}));
  bench_cmd->add_option("--noise", bench_noise, "Simulator noise sigma");
  bench_cmd->add_option("--config", bench_config, "Pipeline key = value file");
  bench_cmd->add_flag("--regression", bench_regression, "Also run acetone concentration regression");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) {
      stage_name = "simulate";
      sim::SimulationConfig cfg;
      if (!sim_config.empty()) cfg = sim::SimulationConfig::from_config(KeyValueConfig::load(sim_config));
      if (sim_cmd->count("--seed")) cfg.seed = sim_seed;
      if (sim_noise)
        for (auto& s : cfg.sensors) s.noise_sigma = *sim_noise;
      if (!sim_table.empty()) {
        const auto id = sim::parse_table_name(sim_table);
        if (!id) throw std::invalid_argument("unknown table '" + sim_table + "'");
        const auto table = sim::builtin_table(*id);
        sim::DatasetOptions opts;
        opts.sensors = cfg.sensors;
        opts.protocol = cfg.protocol;
        const auto sessions = sim::generate_dataset(table, sim::allocate_rows(table.total(), table.rows.size()),
                                                    cfg.seed, opts);
        fs::create_directories(sim_out);
        for (std::size_t i = 0; i < sessions.size(); ++i) {
          char name[64];
          std::snprintf(name, sizeof name, "session_%04zu.csv", i);
          acq::save_session(fs::path(sim_out) / name, sessions[i].session);
        }
        std::cerr << "[simulate] " << sessions.size() << " sessions written to " << sim_out << '\n';
      } else {
        if (sim_cmd->count("--acetone")) cfg.mixture.acetone_ppm = sim_acetone;
        if (sim_cmd->count("--ethanol")) cfg.mixture.ethanol_ppm = sim_ethanol;
        if (sim_cmd->count("--methanol")) cfg.mixture.methanol_ppm = sim_methanol;
        const auto session = cfg.run();
        if (fs::path(sim_out).has_parent_path()) fs::create_directories(fs::path(sim_out).parent_path());
        acq::save_session(sim_out, session);
        std::cerr << "[simulate] " << session.frames.size() << " frames written to " << sim_out << '\n';
      }
    } else if (*ingest_cmd) {
      stage_name = "ingest";
      auto in = open_in(ingest_in);
      auto parsed = acq::parse_stream(in);
      const fs::path meta_src = ingest_meta.empty() ? acq::meta_path_for(ingest_in) : fs::path(ingest_meta);
      if (fs::exists(meta_src)) {
        auto m = open_in(meta_src);
        parsed.session.meta = acq::read_meta(m);
      }
      auto out = open_out(ingest_out);
      acq::write_session_csv(out, parsed.session);
      write_meta_file(ingest_out, parsed.session.meta);
      std::cerr << "[ingest] " << parsed.data_lines << " data lines, " << parsed.malformed << " malformed, "
                << parsed.imputed << " readings imputed\n";
    } else if (*prep_cmd) {
      stage_name = "preprocess";
      const auto filter = prep_filter.config();
      const auto session = acq::load_session(prep_in);
      const auto processed = prep::preprocess_session(session, filter);
      auto out = open_out(prep_out);
      prep::write_processed_csv(out, processed, filter);
      write_meta_file(prep_out, session.meta);
    } else if (*feat_cmd) {
      stage_name = "features";
      const auto filter = feat_filter.config();
      feat::FeatureConfig fc;
      fc.steady_fraction = feat_steady;
      feat::FeatureTable table;
      for (const auto& p : expand_inputs(feat_in)) {
        prep::ProcessedSession processed;
        if (is_processed_file(p)) {
          auto in = open_in(p);
          processed = prep::read_processed_csv(in);
          processed.meta = read_meta_file(p);
        } else {
          processed = prep::preprocess_session(acq::load_session(p), filter);
        }
        try {
          table.push_back(feat::extract_features(processed, fc));
        } catch (const std::exception& e) {
          throw std::runtime_error(p.string() + ": " + e.what());
        }
      }
      auto out = open_out(feat_out);
      feat::write_feature_csv(out, table);
      std::cerr << "[features] " << table.size() << " rows written to " << feat_out << '\n';
    } else if (*tsvm_cmd) {
      stage_name = "train-svm";
      auto cfg = load_pipeline(tsvm_config);
      if (tsvm_cmd->count("--c")) cfg.svm.c_penalty = tsvm_c;
      if (tsvm_cmd->count("--kernel"))
        cfg.svm.kernel.type = tsvm_kernel == "linear" ? svm::KernelType::linear : svm::KernelType::rbf;
      if (tsvm_cmd->count("--gamma")) {
        if (tsvm_gamma == "auto") cfg.svm_gamma.reset();
        else cfg.svm_gamma = parse_double(tsvm_gamma);
      }
      if (tsvm_cmd->count("--features") || tsvm_config.empty()) cfg.projection = *bench::parse_projection(tsvm_features);
      const auto data = load_features(tsvm_in);
      const auto bundle = bench::train_classifier(data.x, data.labels, cfg);
      bench::save_classifier(tsvm_model, bundle);
      std::cerr << "[train-svm] " << bundle.svm.classes.size() << " classes, " << bundle.projector.output_dim()
                << " projected dimensions\n";
    } else if (*cls_cmd) {
      stage_name = "classify";
      const auto bundle = bench::load_classifier(cls_model);
      const auto data = load_features(cls_in);
      const auto predicted = bench::classify(bundle, data.x);
      bench::RunReport r;
      r.table = fs::path(cls_in).filename().string();
      r.n_test = data.size();
      r.projected_dim = bundle.projector.output_dim();
      bench::score_classification(r, data.labels, predicted);
      auto out = open_out(cls_report);
      bench::write_report_csv(out, r);
      if (!cls_predictions.empty()) {
        auto pred = open_out(cls_predictions);
        pred << "index,true_label,predicted_label\n";
        for (std::size_t i = 0; i < predicted.size(); ++i)
          pred << i << ',' << data.labels[i] << ',' << predicted[i] << '\n';
      }
      std::cerr << "[classify] accuracy " << format_double(r.accuracy) << " on " << data.size() << " rows\n";
    } else if (*tmlp_cmd) {
      stage_name = "train-mlp";
      auto cfg = load_pipeline(tmlp_config);
      if (!tmlp_hidden.empty()) cfg.mlp.hidden_layers = tmlp_hidden;
      if (tmlp_lr) cfg.mlp.learning_rate = *tmlp_lr;
      if (tmlp_epochs) cfg.mlp.epochs = *tmlp_epochs;
      if (tmlp_seed) cfg.mlp.seed = *tmlp_seed;
      if (tmlp_cmd->count("--features") || tmlp_config.empty()) cfg.projection = *bench::parse_projection(tmlp_features);
      const auto data = load_features(tmlp_in);
      const auto bundle = bench::train_regressor(data.x, data.acetone_targets(), cfg);
      bench::save_regressor(tmlp_model, bundle);
      if (!tmlp_trace.empty()) {
        auto out = open_out(tmlp_trace);
        out << "epoch,mse_scaled\n";
        for (std::size_t e = 0; e < bundle.mlp.loss_trace.size(); ++e)
          out << e + 1 << ',' << format_double(bundle.mlp.loss_trace[e]) << '\n';
      }
      std::cerr << "[train-mlp] " << bundle.mlp.loss_trace.size() << " epochs, final scaled MSE "
                << format_double(bundle.mlp.loss_trace.back()) << '\n';
    } else if (*pred_cmd) {
      stage_name = "predict";
      const auto bundle = bench::load_regressor(pred_model);
      const auto data = load_features(pred_in);
      const auto predicted = bench::predict_concentration(bundle, data.x);
      const auto targets = data.acetone_targets();
      auto out = open_out(pred_out);
      out << "index,acetone_ppm,predicted_ppm\n";
      for (std::size_t i = 0; i < predicted.size(); ++i)
        out << i << ',' << format_double(targets[i]) << ',' << format_double(predicted[i]) << '\n';
      const auto m = mlp::evaluate_regression(predicted, targets);
      if (!pred_report.empty()) {
        auto rep = open_out(pred_report);
        rep << "key,value\nrmse_ppm," << format_double(m.rmse) << "\nmae_ppm," << format_double(m.mae)
            << "\nr2," << (m.r2 ? format_double(*m.r2) : "undefined") << '\n';
      }
      std::cerr << "[predict] rmse " << format_double(m.rmse) << " ppm on " << data.size() << " rows\n";
    } else if (*bench_cmd) {
      stage_name = "bench";
      const auto id = sim::parse_table_name(bench_table);
      if (!id) throw std::invalid_argument("unknown table '" + bench_table + "'");
      auto cfg = load_pipeline(bench_config);
      if (!bench_features.empty()) cfg.projection = *bench::parse_projection(bench_features);
      if (bench_noise) cfg.noise_sigma = *bench_noise;
      const auto report = bench::run_experiment(*id, cfg, bench_seed, log_stage);
      stage_name = "report";
      bench::emit_report(report, bench_out, bench::ReportFormat::csv);
      bench::emit_report(report, bench_out, bench::ReportFormat::svg);
      std::cout << report.table << " accuracy " << format_double(report.accuracy) << " (" << report.n_train
                << " train / " << report.n_test << " test)\n";
      if (bench_regression) {
        stage_name = "bench";
        const auto reg = bench::run_regression_experiment(*id, cfg, bench_seed, log_stage);
        stage_name = "report";
        bench::emit_regression_report(reg, bench_out);
        std::cout << reg.table << " acetone rmse " << format_double(reg.metrics.rmse) << " ppm, r2 "
                  << (reg.metrics.r2 ? format_double(*reg.metrics.r2) : "undefined") << '\n';
      }
    }
  } catch (const StageError& e) {
    std::cerr << "enose: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "enose: " << stage_name << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
