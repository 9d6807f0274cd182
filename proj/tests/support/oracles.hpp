#pragma once

// Reference computations used as test oracles. None of them call into the
// library's numerical code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

/// Eigenvalues of a symmetric 1x1, 2x2 or 3x3 matrix from its characteristic
/// polynomial, descending.
inline Vec symmetric_eigenvalues(const Mat& a) {
  const std::size_t d = a.size();
  if (d == 1) return {a[0][0]};
  if (d == 2) {
    const double m = 0.5 * (a[0][0] + a[1][1]);
    const double h = 0.5 * (a[0][0] - a[1][1]);
    const double r = std::hypot(h, a[0][1]);
    return {m + r, m - r};
  }
  if (d != 3) throw std::invalid_argument("symmetric_eigenvalues: d must be 1..3");
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  Mat b(3, Vec(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                     b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                     b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  // Newton polish on det(A - x I) = -x^3 + c2 x^2 - c1 x + c0 in long double;
  // the trigonometric form loses digits when roots nearly coincide.
  using L = long double;
  const L c2 = L(a[0][0]) + a[1][1] + a[2][2];
  const L c1 = L(a[0][0]) * a[1][1] + L(a[0][0]) * a[2][2] + L(a[1][1]) * a[2][2] - L(a[0][1]) * a[0][1] -
               L(a[0][2]) * a[0][2] - L(a[1][2]) * a[1][2];
  const L c0 = L(a[0][0]) * (L(a[1][1]) * a[2][2] - L(a[1][2]) * a[2][1]) -
               L(a[0][1]) * (L(a[1][0]) * a[2][2] - L(a[1][2]) * a[2][0]) +
               L(a[0][2]) * (L(a[1][0]) * a[2][1] - L(a[1][1]) * a[2][0]);
  auto polish = [&](double x0) {
    L x = x0;
    const L scale = std::fabs(c2) + std::fabs(L(x0)) + 1e-300L;
    for (int it = 0; it < 80; ++it) {
      const L f = ((-x + c2) * x - c1) * x + c0;
      const L df = (-3 * x + 2 * c2) * x - c1;
      if (df == 0) break;
      const L next = x - f / df;
      if (std::fabs(next - L(x0)) > 1e-6L * scale) break;
      x = next;
    }
    return static_cast<double>(x);
  };
  Vec out{polish(e1), polish(e2), polish(e3)};
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Gaussian elimination with partial pivoting in long double.
inline Vec solve_dense(Mat a, Vec b) {
  const std::size_t n = a.size();
  std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
    m[i][n] = b[i];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    if (m[c][c] == 0.0L) throw std::domain_error("solve_dense: singular");
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = m[i][n];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = static_cast<double>(s / m[i][i]);
  }
  return x;
}

/// Polynomial least squares through the normal equations, lowest order first.
inline Vec polyfit_normal(const Vec& t, const Vec& y, int degree) {
  const auto k = static_cast<std::size_t>(degree) + 1;
  Mat ata(k, Vec(k, 0.0));
  Vec aty(k, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    Vec pw(k);
    pw[0] = 1.0;
    for (std::size_t j = 1; j < k; ++j) pw[j] = pw[j - 1] * t[i];
    for (std::size_t r = 0; r < k; ++r) {
      aty[r] += pw[r] * y[i];
      for (std::size_t c = 0; c < k; ++c) ata[r][c] += pw[r] * pw[c];
    }
  }
  return solve_dense(ata, aty);
}

struct PowerLawFit {
  double coeff = 0.0;
  double exponent = 0.0;
  double rss = 0.0;
};

/// Brute-force search over the exponent with nested refinement; for each
/// exponent the best log-coefficient is the mean residual.
inline PowerLawFit power_law_grid(const Vec& ppm, const Vec& s) {
  Vec lx, ly;
  for (std::size_t i = 0; i < ppm.size(); ++i)
    if (ppm[i] > 0.0 && s[i] > 1.0) {
      lx.push_back(std::log(ppm[i]));
      ly.push_back(std::log(s[i] - 1.0));
    }
  auto eval = [&](double b) {
    double la = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) la += ly[i] - b * lx[i];
    la /= static_cast<double>(lx.size());
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - la - b * lx[i];
      rss += r * r;
    }
    return PowerLawFit{std::exp(la), b, rss};
  };
  double lo = 1e-6, hi = 1.0;
  PowerLawFit best = eval(hi);
  for (int level = 0; level < 8; ++level) {
    const int steps = 200;
    double best_b = best.exponent;
    for (int i = 0; i <= steps; ++i) {
      const double b = lo + (hi - lo) * i / steps;
      const auto f = eval(b);
      if (f.rss < best.rss) {
        best = f;
        best_b = b;
      }
    }
    const double w = (hi - lo) / steps;
    lo = std::max(1e-6, best_b - w);
    hi = std::min(1.0, best_b + w);
  }
  return best;
}

/// Euclidean projection onto {0 <= a <= c, sum a_i y_i = 0} by bisection on the
/// equality multiplier.
inline Vec project_box_hyperplane(const Vec& v, const std::vector<int>& y, double c) {
  auto at = [&](double mu) {
    Vec a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - mu * y[i], 0.0, c);
    return a;
  };
  auto g = [&](double mu) {
    const Vec a = at(mu);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * y[i];
    return s;
  };
  double lo = -1.0, hi = 1.0;
  while (g(lo) < 0.0) lo *= 2.0;
  while (g(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

inline double dual_value(const Mat& k, const std::vector<int>& y, const Vec& a) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
  }
  return lin - 0.5 * quad;
}

/// Accelerated projected gradient ascent on the soft-margin SVM dual.
inline Vec svm_dual_projected_gradient(const Mat& k, const std::vector<int>& y, double c, int iterations = 50000) {
  const std::size_t n = y.size();
  double lip = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::fabs(k[i][j]);
    lip = std::max(lip, row);
  }
  const double step = 1.0 / lip;
  Vec a(n, 0.0), prev = a, z = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    Vec grad(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += y[i] * y[j] * k[i][j] * z[j];
      grad[i] = 1.0 - s;
    }
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = z[i] + step * grad[i];
    prev = a;
    a = project_box_hyperplane(v, y, c);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + (t - 1.0) / tn * (a[i] - prev[i]);
    t = tn;
    // Restart momentum when it stops helping.
    if (dual_value(k, y, a) < dual_value(k, y, prev)) {
      z = a;
      t = 1.0;
    }
  }
  return a;
}

/// Central differences of a scalar function of a parameter vector.
inline Vec central_difference(const std::function<double(const Vec&)>& f, Vec p, double h) {
  Vec g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
