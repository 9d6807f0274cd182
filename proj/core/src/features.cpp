#include "enose/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace enose::feat {

FeatureVector extract_features(const prep::ProcessedSession& session, const FeatureConfig& cfg) {
  if (!session.meta.exposure)
    throw std::invalid_argument("extract_features: session has no exposure window");
  const auto& w = *session.meta.exposure;
  const auto& t = session.t_ms;
  if (t.empty() || t.back() < w.end_ms - 1)
    throw std::invalid_argument("extract_features: session ends before the exposure phase");

  const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), w.start_ms) - t.begin());
  const auto last = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), w.end_ms) - t.begin());
  if (last <= first + 1)
    throw std::invalid_argument("extract_features: exposure phase holds fewer than two samples");

  const std::size_t count = last - first;
  const auto steady_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.steady_fraction * static_cast<double>(count))));
  // The rise starts at the transition into the window.
  const std::size_t slope_from = first > 0 ? first - 1 : first;

  FeatureVector f;
  f.label = session.meta.label;
  f.mixture = session.meta.mixture.value_or(GasMixture{});
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& y = session.channels[c];

    double steady = 0.0;
    for (std::size_t i = last - steady_n; i < last; ++i) steady += y[i];
    steady /= static_cast<double>(steady_n);

    double slope = 0.0;
    for (std::size_t i = slope_from; i + 1 < last; ++i) {
      const double dt = static_cast<double>(t[i + 1] - t[i]) / 1000.0;
      slope = std::max(slope, (y[i + 1] - y[i]) / dt);
    }

    double area = 0.0;
    for (std::size_t i = first; i + 1 < last; ++i) {
      const double dt = static_cast<double>(t[i + 1] - t[i]) / 1000.0;
      area += 0.5 * (y[i] + y[i + 1]) * dt;
    }

    f.values[c] = steady;
    f.values[kChannelCount + c] = slope;
    f.values[2 * kChannelCount + c] = area;
  }
  return f;
}

void FeatureTable::push_back(const FeatureVector& f) {
  Matrix grown(x.rows() + 1, kFeatureDim);
  std::copy(x.data().begin(), x.data().end(), grown.data().begin());
  std::copy(f.values.begin(), f.values.end(), grown.row(x.rows()).begin());
  x = std::move(grown);
  labels.push_back(f.label);
  mixtures.push_back(f.mixture);
}

std::vector<double> FeatureTable::acetone_targets() const {
  std::vector<double> y(mixtures.size());
  std::transform(mixtures.begin(), mixtures.end(), y.begin(),
                 [](const GasMixture& m) { return m.acetone_ppm; });
  return y;
}

FeatureTable FeatureTable::subset(std::span<const std::size_t> rows) const {
  FeatureTable out;
  out.x = Matrix(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
    out.mixtures.push_back(mixtures[rows[i]]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  for (std::size_t j = 0; j < kFeatureDim; ++j) out << 'f' << j + 1 << ',';
  out << "label,acetone_ppm,ethanol_ppm,methanol_ppm\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (double v : table.x.row(i)) out << format_double(v) << ',';
    const auto& m = table.mixtures[i];
    out << table.labels[i] << ',' << format_double(m.acetone_ppm) << ','
        << format_double(m.ethanol_ppm) << ',' << format_double(m.methanol_ppm) << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in) {
  FeatureTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#' || line.rfind("f1,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != kFeatureDim + 4)
      throw std::runtime_error("feature csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(kFeatureDim + 4) + " fields");
    try {
      for (std::size_t j = 0; j < kFeatureDim; ++j) flat.push_back(parse_double(fields[j]));
      table.labels.push_back(std::stoi(fields[kFeatureDim]));
      GasMixture m{parse_double(fields[kFeatureDim + 1]), parse_double(fields[kFeatureDim + 2]),
                   parse_double(fields[kFeatureDim + 3])};
      table.mixtures.push_back(m);
    } catch (const std::exception&) {
      throw std::runtime_error("feature csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  table.x = Matrix(table.labels.size(), kFeatureDim);
  std::copy(flat.begin(), flat.end(), table.x.data().begin());
  return table;
}

// ---------------------------------------------------------------------------

std::vector<double> PcaModel::explained_variance_ratio() const {
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  std::vector<double> r(eigenvalues.size(), 0.0);
  if (total > 0.0)
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = eigenvalues[j] / total;
  return r;
}

PcaModel pca_fit(const Matrix& x, double variance_threshold, std::optional<std::size_t> fixed_k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least two samples");
  if (d == 0) throw std::invalid_argument("pca_fit: zero-dimensional data");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw std::invalid_argument("pca_fit: variance threshold must be in (0, 1]");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += x(i, j);
  for (auto& m : model.mean) m /= static_cast<double>(n);

  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double da = x(i, a) - model.mean[a];
      for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (x(i, b) - model.mean[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) cov(b, a) = cov(a, b) /= static_cast<double>(n);

  const SymmetricEigen eig = jacobi_eigen(cov);
  model.eigenvalues = eig.values;
  for (auto& v : model.eigenvalues) v = std::max(v, 0.0);
  model.components = eig.vectors.transposed();

  if (fixed_k) {
    if (*fixed_k == 0 || *fixed_k > d) throw std::invalid_argument("pca_fit: fixed_k out of range");
    model.retained_k = *fixed_k;
  } else {
    const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
    model.retained_k = d;
    if (total > 0.0) {
      double cum = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        cum += model.eigenvalues[k];
        // Tolerate round-off so that threshold 1.0 selects all informative axes.
        if (cum >= variance_threshold * total * (1.0 - 1e-12)) {
          model.retained_k = k + 1;
          break;
        }
      }
    } else {
      model.retained_k = 1;
    }
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) throw std::invalid_argument("pca_transform: dimension mismatch");
  Matrix scores(x.rows(), model.retained_k);
  std::vector<double> centered(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) centered[j] = x(i, j) - model.mean[j];
    for (std::size_t k = 0; k < model.retained_k; ++k) scores(i, k) = dot(centered, model.components.row(k));
  }
  return scores;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& scores) {
  if (scores.cols() != model.retained_k)
    throw std::invalid_argument("pca_inverse_transform: dimension mismatch");
  Matrix x(scores.rows(), model.input_dim());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t j = 0; j < model.input_dim(); ++j) {
      double v = model.mean[j];
      for (std::size_t k = 0; k < model.retained_k; ++k) v += scores(i, k) * model.components(k, j);
      x(i, j) = v;
    }
  }
  return x;
}

// ---------------------------------------------------------------------------

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * squared_distance(a, b));
}

double default_gamma(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = std::max<std::size_t>(1, x.cols());
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dists.push_back(squared_distance(x.row(i), x.row(j)));
  if (dists.empty()) return 1.0 / static_cast<double>(d);
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), mid);
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) return 1.0 / static_cast<double>(d);
  return 1.0 / (static_cast<double>(d) * median);
}

Matrix rbf_gram(const Matrix& x, double gamma) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k(i, j) = k(j, i) = rbf_kernel(x.row(i), x.row(j), gamma);
  }
  return k;
}

Matrix center_gram(const Matrix& k) {
  const std::size_t n = k.rows();
  std::vector<double> col_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col_mean[j] += k(i, j);
  for (auto& m : col_mean) {
    m /= static_cast<double>(n);
    total += m;
  }
  total /= static_cast<double>(n);
  Matrix c(n, n);
  // K is symmetric, so row means equal column means.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = k(i, j) - col_mean[i] - col_mean[j] + total;
  return c;
}

KpcaModel kpca_fit(const Matrix& x, double gamma, const KpcaOptions& opts) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("kpca_fit: gamma must be > 0");
  const std::size_t n = x.rows();
  if (n < 2) throw std::invalid_argument("kpca_fit: need at least two samples");

  KpcaModel model;
  model.training = x;
  model.gamma = gamma;

  const Matrix k = rbf_gram(x, gamma);
  model.gram_column_mean.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) model.gram_column_mean[j] += k(i, j);
  for (auto& m : model.gram_column_mean) m /= static_cast<double>(n);
  model.gram_total_mean = std::accumulate(model.gram_column_mean.begin(), model.gram_column_mean.end(), 0.0) /
                          static_cast<double>(n);

  const Matrix kc = center_gram(k);
  const SymmetricEigen eig = jacobi_eigen(kc);
  model.eigenvalues = eig.values;

  const double largest = eig.values.empty() ? 0.0 : eig.values.front();
  const double floor = std::max(kKpcaEigenFloor * largest, 1e-12 * static_cast<double>(n));
  std::size_t usable = 0;
  while (usable < n && eig.values[usable] > floor) ++usable;

  std::size_t keep = usable;
  if (opts.max_components > 0) {
    keep = std::min(usable, opts.max_components);
  } else if (usable > 0) {
    double positive = 0.0;
    for (double v : eig.values) positive += std::max(v, 0.0);
    double cum = 0.0;
    for (std::size_t j = 0; j < usable; ++j) {
      cum += eig.values[j];
      if (cum >= opts.variance_threshold * positive * (1.0 - 1e-12)) {
        keep = j + 1;
        break;
      }
    }
  }

  model.alphas = Matrix(n, keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const double inv_sqrt = 1.0 / std::sqrt(eig.values[j]);
    for (std::size_t i = 0; i < n; ++i) model.alphas(i, j) = eig.vectors(i, j) * inv_sqrt;
  }
  model.training_scores = kc * model.alphas;
  return model;
}

Matrix kpca_transform(const KpcaModel& model, const Matrix& x) {
  const std::size_t n = model.training.rows();
  if (x.cols() != model.training.cols()) throw std::invalid_argument("kpca_transform: dimension mismatch");
  Matrix scores(x.rows(), model.retained_k());
  std::vector<double> kr(n);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double row_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      kr[i] = rbf_kernel(model.training.row(i), x.row(r), model.gamma);
      row_mean += kr[i];
    }
    row_mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) kr[i] = kr[i] - row_mean - model.gram_column_mean[i] + model.gram_total_mean;
    for (std::size_t j = 0; j < model.retained_k(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += kr[i] * model.alphas(i, j);
      scores(r, j) = s;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------

void write_pca(std::ostream& out, const PcaModel& m) {
  out << "pca " << m.input_dim() << ' ' << m.retained_k << '\n';
  detail::write_vector(out, "mean", m.mean);
  detail::write_vector(out, "eigenvalues", m.eigenvalues);
  detail::write_matrix(out, "components", m.components);
}

PcaModel read_pca(std::istream& in) {
  detail::expect_token(in, "pca");
  PcaModel m;
  const auto d = detail::read_value<std::size_t>(in, "pca dimension");
  m.retained_k = detail::read_value<std::size_t>(in, "pca retained_k");
  m.mean = detail::read_vector(in, "mean");
  m.eigenvalues = detail::read_vector(in, "eigenvalues");
  m.components = detail::read_matrix(in, "components");
  if (m.mean.size() != d || m.components.cols() != d || m.retained_k > m.components.rows())
    throw std::runtime_error("model file: inconsistent pca block");
  return m;
}

void write_kpca(std::ostream& out, const KpcaModel& m) {
  out << "kpca " << format_double(m.gamma) << ' ' << format_double(m.gram_total_mean) << '\n';
  detail::write_vector(out, "eigenvalues", m.eigenvalues);
  detail::write_vector(out, "gram_column_mean", m.gram_column_mean);
  detail::write_matrix(out, "training", m.training);
  detail::write_matrix(out, "alphas", m.alphas);
}

KpcaModel read_kpca(std::istream& in) {
  detail::expect_token(in, "kpca");
  KpcaModel m;
  m.gamma = detail::read_value<double>(in, "kpca gamma");
  m.gram_total_mean = detail::read_value<double>(in, "kpca gram mean");
  m.eigenvalues = detail::read_vector(in, "eigenvalues");
  m.gram_column_mean = detail::read_vector(in, "gram_column_mean");
  m.training = detail::read_matrix(in, "training");
  m.alphas = detail::read_matrix(in, "alphas");
  if (m.gram_column_mean.size() != m.training.rows() || m.alphas.rows() != m.training.rows())
    throw std::runtime_error("model file: inconsistent kpca block");
  m.training_scores = kpca_transform(m, m.training);
  return m;
}

}  // namespace enose::feat
