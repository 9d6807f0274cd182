#include "enose/classify.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "text_io.hpp"

namespace enose::svm {

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  if (type == KernelType::linear) return dot(a, b);
  return std::exp(-gamma * squared_distance(a, b));
}

void SvmParams::validate() const {
  if (!(c_penalty > 0.0)) throw std::invalid_argument("SvmParams: C must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("SvmParams: tol must be > 0");
  if (kernel.type == KernelType::rbf && !(kernel.gamma > 0.0))
    throw std::invalid_argument("SvmParams: rbf gamma must be > 0");
  if (max_passes < 1) throw std::invalid_argument("SvmParams: max_passes must be >= 1");
}

double BinaryModel::decision(std::span<const double> x) const {
  if (support_vectors.rows() > 0 && x.size() != support_vectors.cols())
    throw std::invalid_argument("svm decision: dimension mismatch");
  double f = bias;
  for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * kernel(support_vectors.row(i), x);
  return f;
}

namespace {

// Two-variable SMO. Each step optimises the maximal violating pair: over the
// index sets I_up / I_low (Keerthi's two-threshold form), the pair with the
// largest gap between their bias-free errors F_i = f0(x_i) - y_i. The bias is
// fixed only after convergence, so the loop cannot stall on a stale threshold.
class Smo {
 public:
  Smo(const Matrix& x, std::span<const int> y, const SvmParams& p)
      : n_(x.rows()), y_(y.begin(), y.end()), c_(p.c_penalty), eps_(p.tol),
        alpha_(n_, 0.0), err_(n_), gram_(n_, n_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) gram_(i, j) = gram_(j, i) = p.kernel(x.row(i), x.row(j));
    for (std::size_t i = 0; i < n_; ++i) err_[i] = -static_cast<double>(y_[i]);
  }

  int run(int max_iterations) {
    int iterations = 0;
    while (true) {
      const auto [up, low, gap] = select_pair();
      if (gap <= eps_) break;
      if (iterations >= max_iterations)
        throw ConvergenceError("svm_train_binary: SMO did not converge after " +
                                   std::to_string(iterations) + " iterations (KKT gap " +
                                   format_double(gap) + ")",
                               iterations);
      ++iterations;
      step(up, low);
    }
    return iterations;
  }

  // Mean of y_i - f0(x_i) over free vectors; otherwise the midpoint of the
  // interval allowed by the bound vectors.
  double final_bias() const {
    double sum = 0.0;
    std::size_t free = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double yi = y_[i];
      const double edge = -err_[i];  // y_i - f0(x_i)
      if (is_free(i)) {
        sum += edge;
        ++free;
        continue;
      }
      // alpha = 0 needs y f >= 1; alpha = C needs y f <= 1.
      const bool at_zero = alpha_[i] <= 0.0;
      if ((yi > 0) == at_zero) lo = std::max(lo, edge);
      else hi = std::min(hi, edge);
    }
    if (free > 0) return sum / static_cast<double>(free);
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
  }

  const std::vector<double>& alphas() const noexcept { return alpha_; }

 private:
  struct Pair {
    std::size_t up;
    std::size_t low;
    double gap;
  };

  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }
  bool in_up(std::size_t i) const { return y_[i] > 0 ? alpha_[i] < c_ : alpha_[i] > 0.0; }
  bool in_low(std::size_t i) const { return y_[i] > 0 ? alpha_[i] > 0.0 : alpha_[i] < c_; }

  // Largest -F over I_up against smallest -F over I_low, i.e. max |E_i - E_j|
  // among pairs that violate the KKT conditions.
  Pair select_pair() const {
    Pair p{n_, n_, -std::numeric_limits<double>::infinity()};
    double m = -std::numeric_limits<double>::infinity();
    double big_m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      if (in_up(i) && -err_[i] > m) {
        m = -err_[i];
        p.up = i;
      }
      if (in_low(i) && -err_[i] < big_m) {
        big_m = -err_[i];
        p.low = i;
      }
    }
    if (p.up < n_ && p.low < n_) p.gap = m - big_m;
    return p;
  }

  void step(std::size_t i1, std::size_t i2) {
    const double a1 = alpha_[i1];
    const double a2 = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }

    double eta = gram_(i1, i1) + gram_(i2, i2) - 2.0 * gram_(i1, i2);
    // Coincident points: take the largest feasible step along the descent direction.
    if (eta <= 0.0) eta = 1e-12;
    double a2n = std::clamp(a2 + y2 * (err_[i1] - err_[i2]) / eta, lo, hi);
    if (a2n < 1e-12 * c_) a2n = 0.0;
    else if (a2n > c_ * (1.0 - 1e-12)) a2n = c_;

    double a1n = a1 + s * (a2 - a2n);
    if (a1n < 1e-12 * c_) {
      a2n += s * a1n;
      a1n = 0.0;
    } else if (a1n > c_ * (1.0 - 1e-12)) {
      a2n += s * (a1n - c_);
      a1n = c_;
    }
    // Rounding in the transfer can leave a2 a few ulps inside a bound.
    if (a2n < 1e-12 * c_) a2n = 0.0;
    else if (a2n > c_ * (1.0 - 1e-12)) a2n = c_;

    const double d1 = y1 * (a1n - a1);
    const double d2 = y2 * (a2n - a2);
    for (std::size_t i = 0; i < n_; ++i) err_[i] += d1 * gram_(i1, i) + d2 * gram_(i2, i);
    alpha_[i1] = a1n;
    alpha_[i2] = a2n;
  }

  std::size_t n_;
  std::vector<int> y_;
  double c_;
  double eps_;
  std::vector<double> alpha_;
  std::vector<double> err_;
  Matrix gram_;
};

}  // namespace

BinaryTraining svm_train_binary(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  params.validate();
  if (x.rows() != y.size()) throw std::invalid_argument("svm_train_binary: label count mismatch");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("svm_train_binary: labels must be -1 or +1");
  }
  if (!pos || !neg) throw std::invalid_argument("svm_train_binary: both classes must be present");
  for (double v : x.data())
    if (!std::isfinite(v)) throw std::invalid_argument("svm_train_binary: non-finite input");

  Smo smo(x, y, params);
  BinaryTraining out;
  out.iterations = smo.run(params.max_passes);
  out.alphas = smo.alphas();
  out.model.kernel = params.kernel;
  out.model.bias = smo.final_bias();

  std::size_t count = 0;
  for (double a : out.alphas) count += a > 0.0 ? 1 : 0;
  out.model.support_vectors = Matrix(count, x.cols());
  std::size_t r = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (!(out.alphas[i] > 0.0)) continue;
    std::copy(x.row(i).begin(), x.row(i).end(), out.model.support_vectors.row(r++).begin());
    out.model.coef.push_back(out.alphas[i] * y[i]);
  }
  return out;
}

double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alphas,
                      const Kernel& kernel) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    linear += alphas[i];
    if (alphas[i] == 0.0) continue;
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (alphas[j] == 0.0) continue;
      quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel(x.row(i), x.row(j));
    }
  }
  return linear - 0.5 * quad;
}

SvmModel svm_train_multiclass(const Matrix& x, std::span<const int> labels, const SvmParams& params) {
  if (x.rows() != labels.size()) throw std::invalid_argument("svm_train_multiclass: label count mismatch");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw std::invalid_argument("svm_train_multiclass: need at least two classes");

  SvmModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  model.input_dim = x.cols();
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      const int ca = model.classes[a];
      const int cb = model.classes[b];
      std::vector<std::size_t> rows;
      std::vector<int> y;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == ca || labels[i] == cb) {
          rows.push_back(i);
          y.push_back(labels[i] == ca ? 1 : -1);
        }
      }
      Matrix sub(rows.size(), x.cols());
      for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), sub.row(i).begin());
      model.pairs.push_back({ca, cb, svm_train_binary(sub, y, params).model});
    }
  }
  return model;
}

VoteResult svm_vote(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) throw std::invalid_argument("svm_predict: dimension mismatch");
  const std::size_t k = model.classes.size();
  VoteResult r;
  r.votes.assign(k, 0);
  r.decision_sums.assign(k, 0.0);
  auto index_of = [&](int cls) {
    return static_cast<std::size_t>(std::lower_bound(model.classes.begin(), model.classes.end(), cls) -
                                    model.classes.begin());
  };
  for (const auto& p : model.pairs) {
    const double d = p.model.decision(x);
    const std::size_t ip = index_of(p.positive_class);
    const std::size_t in = index_of(p.negative_class);
    ++r.votes[d >= 0.0 ? ip : in];
    r.decision_sums[ip] += d;
    r.decision_sums[in] -= d;
  }
  const int top = *std::max_element(r.votes.begin(), r.votes.end());
  std::size_t best = k;
  std::size_t tied = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (r.votes[c] != top) continue;
    ++tied;
    if (best == k || r.decision_sums[c] > r.decision_sums[best]) best = c;
  }
  r.tied = tied > 1;
  r.winner = model.classes[best];
  return r;
}

int svm_predict(const SvmModel& model, std::span<const double> x) { return svm_vote(model, x).winner; }

std::vector<int> svm_predict(const SvmModel& model, const Matrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = svm_predict(model, x.row(i));
  return out;
}

void write_svm(std::ostream& out, const SvmModel& m) {
  out << "svm " << m.input_dim << ' ' << m.classes.size();
  for (int c : m.classes) out << ' ' << c;
  out << '\n';
  for (const auto& p : m.pairs) {
    const auto& b = p.model;
    out << "pair " << p.positive_class << ' ' << p.negative_class << ' '
        << (b.kernel.type == KernelType::linear ? "linear" : "rbf") << ' ' << format_double(b.kernel.gamma)
        << ' ' << format_double(b.bias) << '\n';
    detail::write_vector(out, "coef", b.coef);
    detail::write_matrix(out, "sv", b.support_vectors);
  }
}

SvmModel read_svm(std::istream& in) {
  detail::expect_token(in, "svm");
  SvmModel m;
  m.input_dim = detail::read_value<std::size_t>(in, "svm dimension");
  const auto k = detail::read_value<std::size_t>(in, "svm class count");
  for (std::size_t i = 0; i < k; ++i) m.classes.push_back(detail::read_value<int>(in, "class"));
  if (k < 2 || !std::is_sorted(m.classes.begin(), m.classes.end()))
    throw std::runtime_error("model file: bad svm class list");
  for (std::size_t i = 0; i < k * (k - 1) / 2; ++i) {
    detail::expect_token(in, "pair");
    PairModel p;
    p.positive_class = detail::read_value<int>(in, "positive class");
    p.negative_class = detail::read_value<int>(in, "negative class");
    const auto kind = detail::read_value<std::string>(in, "kernel");
    if (kind != "linear" && kind != "rbf") throw std::runtime_error("model file: unknown kernel " + kind);
    p.model.kernel.type = kind == "linear" ? KernelType::linear : KernelType::rbf;
    p.model.kernel.gamma = detail::read_value<double>(in, "gamma");
    p.model.bias = detail::read_value<double>(in, "bias");
    p.model.coef = detail::read_vector(in, "coef");
    p.model.support_vectors = detail::read_matrix(in, "sv");
    if (p.model.coef.size() != p.model.support_vectors.rows())
      throw std::runtime_error("model file: support vector count mismatch");
    m.pairs.push_back(std::move(p));
  }
  return m;
}

}  // namespace enose::svm
