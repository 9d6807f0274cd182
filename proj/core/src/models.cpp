#include "enose/models.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "text_io.hpp"

namespace enose::bench {

namespace {

constexpr int kFormatVersion = 1;

void expect_header(std::istream& in, const std::string& magic) {
  detail::expect_token(in, magic);
  const auto version = detail::read_value<int>(in, "format version");
  if (version != kFormatVersion)
    throw std::runtime_error("model file: unsupported " + magic + " version " + std::to_string(version));
}

std::ofstream open_model_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_model_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

}  // namespace

ClassifierBundle train_classifier(const Matrix& x, std::span<const int> labels, const PipelineConfig& cfg) {
  ClassifierBundle b;
  b.projector = fit_projector(x, cfg);
  const Matrix z = b.projector.apply(x);
  svm::SvmParams params = cfg.svm;
  if (params.kernel.type == svm::KernelType::rbf) params.kernel.gamma = cfg.svm_gamma.value_or(feat::default_gamma(z));
  b.svm = svm::svm_train_multiclass(z, labels, params);
  return b;
}

std::vector<int> classify(const ClassifierBundle& b, const Matrix& x) {
  return svm::svm_predict(b.svm, b.projector.apply(x));
}

RegressorBundle train_regressor(const Matrix& x, std::span<const double> targets_ppm, const PipelineConfig& cfg) {
  RegressorBundle b;
  b.projector = fit_projector(x, cfg);
  const Matrix z = b.projector.apply(x);
  mlp::MlpConfig mc = cfg.mlp;
  mc.input_dim = z.cols();
  b.mlp = mlp::mlp_train(z, targets_ppm, mc);
  return b;
}

std::vector<double> predict_concentration(const RegressorBundle& b, const Matrix& x) {
  return mlp::mlp_predict(b.mlp, b.projector.apply(x));
}

void write_projector(std::ostream& out, const Projector& p) {
  out << "projector " << projection_name(p.kind) << '\n';
  prep::write_standardizer(out, p.scaler);
  if (p.kind == Projection::pca) feat::write_pca(out, *p.pca);
  if (p.kind == Projection::kpca) feat::write_kpca(out, *p.kpca);
}

Projector read_projector(std::istream& in) {
  detail::expect_token(in, "projector");
  std::string kind;
  in >> kind;
  const auto k = parse_projection(kind);
  if (!k) throw std::runtime_error("model file: unknown projection '" + kind + "'");
  Projector p;
  p.kind = *k;
  p.scaler = prep::read_standardizer(in);
  if (p.kind == Projection::pca) p.pca = feat::read_pca(in);
  if (p.kind == Projection::kpca) p.kpca = feat::read_kpca(in);
  return p;
}

void write_classifier(std::ostream& out, const ClassifierBundle& b) {
  out << "enose-svm " << kFormatVersion << '\n';
  write_projector(out, b.projector);
  svm::write_svm(out, b.svm);
}

ClassifierBundle read_classifier(std::istream& in) {
  expect_header(in, "enose-svm");
  ClassifierBundle b;
  b.projector = read_projector(in);
  b.svm = svm::read_svm(in);
  if (b.svm.input_dim != b.projector.output_dim())
    throw std::runtime_error("model file: projector output does not match the svm input");
  return b;
}

void write_regressor(std::ostream& out, const RegressorBundle& b) {
  out << "enose-mlp " << kFormatVersion << '\n';
  write_projector(out, b.projector);
  mlp::write_mlp(out, b.mlp);
}

RegressorBundle read_regressor(std::istream& in) {
  expect_header(in, "enose-mlp");
  RegressorBundle b;
  b.projector = read_projector(in);
  b.mlp = mlp::read_mlp(in);
  return b;
}

void save_classifier(const std::filesystem::path& path, const ClassifierBundle& b) {
  auto out = open_model_out(path);
  write_classifier(out, b);
}

ClassifierBundle load_classifier(const std::filesystem::path& path) {
  auto in = open_model_in(path);
  return read_classifier(in);
}

void save_regressor(const std::filesystem::path& path, const RegressorBundle& b) {
  auto out = open_model_out(path);
  write_regressor(out, b);
}

RegressorBundle load_regressor(const std::filesystem::path& path) {
  auto in = open_model_in(path);
  return read_regressor(in);
}

void score_classification(RunReport& r, std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("score_classification: length mismatch");
  std::set<int> cls(truth.begin(), truth.end());
  cls.insert(predicted.begin(), predicted.end());
  r.classes.assign(cls.begin(), cls.end());
  const std::size_t k = r.classes.size();
  auto idx = [&](int c) {
    return static_cast<std::size_t>(std::lower_bound(r.classes.begin(), r.classes.end(), c) - r.classes.begin());
  };
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[idx(truth[i])][idx(predicted[i])];
    correct += truth[i] == predicted[i] ? 1 : 0;
  }
  r.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  r.precision.clear();
  r.recall.clear();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += r.confusion[c][j];
      col += r.confusion[j][c];
    }
    r.recall.push_back(row ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(row) : 0.0);
    r.precision.push_back(col ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(col) : 0.0);
  }
}

}  // namespace enose::bench
