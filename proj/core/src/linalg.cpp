#include "enose/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace enose {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw std::invalid_argument("from_rows: ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (n != symmetric.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");

  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  SymmetricEigen result;

  double scale = 0.0;
  for (double x : a.data()) scale = std::max(scale, std::abs(x));

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  const double eps = std::numeric_limits<double>::epsilon();
  int sweep = 0;
  if (scale > 0.0) {
    for (; sweep < max_sweeps; ++sweep) {
      if (off_norm() <= eps * scale) break;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (std::abs(apq) <= 1e-300) continue;
          const double app = a(p, p);
          const double aqq = a(q, q);
          // Skip rotations whose effect is below round-off of the diagonal.
          if (sweep > 3 && std::abs(apq) < eps * 0.01 * (std::abs(app) + std::abs(aqq))) {
            a(p, q) = a(q, p) = 0.0;
            continue;
          }
          const double theta = (aqq - app) / (2.0 * apq);
          const double t = std::copysign(1.0, theta) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;

          for (std::size_t k = 0; k < n; ++k) {
            if (k == p || k == q) continue;
            const double akp = a(k, p);
            const double akq = a(k, q);
            const double nkp = c * akp - s * akq;
            const double nkq = s * akp + c * akq;
            a(k, p) = a(p, k) = nkp;
            a(k, q) = a(q, k) = nkq;
          }
          a(p, p) = app - t * apq;
          a(q, q) = aqq + t * apq;
          a(p, q) = a(q, p) = 0.0;

          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    if (sweep == max_sweeps && off_norm() > eps * scale * 16.0)
      throw std::runtime_error("jacobi_eigen: no convergence after " +
                               std::to_string(max_sweeps) + " sweeps");
  }
  result.sweeps = sweep;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  result.values.resize(n);
  result.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    result.values[j] = a(src, src);
    std::size_t arg = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(arg, src))) arg = k;
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) result.vectors(k, j) = sign * v(k, src);
  }
  return result;
}

std::vector<double> least_squares(const Matrix& a_in, std::span<const double> b_in) {
  const std::size_t m = a_in.rows();
  const std::size_t n = a_in.cols();
  if (b_in.size() != m) throw std::invalid_argument("least_squares: rhs length mismatch");
  if (m < n) throw std::domain_error("least_squares: fewer equations than unknowns");

  Matrix a = a_in;
  std::vector<double> b(b_in.begin(), b_in.end());

  std::vector<double> col_scale(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s = std::max(s, std::abs(a(i, j)));
    if (s == 0.0) throw std::domain_error("least_squares: zero column");
    col_scale[j] = s;
    for (std::size_t i = 0; i < m; ++i) a(i, j) /= s;
  }

  std::vector<double> diag(n);
  double first_diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (k == 0) first_diag = norm;
    if (norm <= 1e-12 * std::max(first_diag, 1.0))
      throw std::domain_error("least_squares: rank-deficient design matrix");
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    // Householder vector stored in column k below the diagonal.
    a(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += a(i, k) * a(i, k);
    for (std::size_t j = k + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += a(i, k) * a(i, j);
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= s * a(i, k);
    }
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += a(i, k) * b[i];
    s = 2.0 * s / vnorm2;
    for (std::size_t i = k; i < m; ++i) b[i] -= s * a(i, k);
    diag[k] = alpha;
  }

  std::vector<double> x(n);
  for (std::size_t kk = n; kk-- > 0;) {
    double s = b[kk];
    for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * x[j];
    x[kk] = s / diag[kk];
  }
  for (std::size_t j = 0; j < n; ++j) x[j] /= col_scale[j];
  return x;
}

}  // namespace enose
