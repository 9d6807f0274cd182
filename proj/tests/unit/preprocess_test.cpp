#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "enose/dataset.hpp"
#include "enose/preprocess.hpp"
#include "oracles.hpp"

using namespace enose;
using namespace enose::prep;

namespace {

// Brute-force windowed mean over whatever part of the window exists.
std::vector<double> windowed_mean(const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double s = 0;
    int cnt = 0;
    for (int j = i - m / 2; j <= i + m / 2; ++j)
      if (j >= 0 && j < n) {
        s += x[j];
        ++cnt;
      }
    out.push_back(s / cnt);
  }
  return out;
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> time_axis(std::size_t n, double dt = 0.1) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

}  // namespace

TEST_CASE("moving average examples") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto y = moving_average(x, 3);
  const std::vector<double> expected{1.5, 2, 3, 4, 4.5};
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(expected[i]).epsilon(1e-15));
  CHECK(y == windowed_mean(x, 3));
  CHECK(moving_average(x, 1) == x);
  const std::vector<double> c(9, 2.5);
  for (double v : moving_average(c, 7)) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS(moving_average(std::vector<double>{}, 3));
  CHECK_THROWS(moving_average(x, 4));
  CHECK_THROWS(moving_average(x, 0));
}

TEST_CASE("moving average matches brute force, window wider than series included") {
  std::mt19937_64 rng(5);
  for (int m : {1, 3, 5, 9, 31}) {
    for (std::size_t n : {1u, 2u, 7u, 40u}) {
      const auto x = random_series(rng, n);
      const auto y = moving_average(x, m);
      const auto ref = windowed_mean(x, m);
      for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("moving average is linear and bounded") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> coef(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 60;
    const int m = 1 + 2 * (trial % 6);
    const auto x = random_series(rng, n), y = random_series(rng, n);
    const double a = coef(rng), b = coef(rng);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
    const auto lhs = moving_average(mix, m);
    const auto mx = moving_average(x, m), my = moving_average(y, m);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(lhs[i] - (a * mx[i] + b * my[i])) <= 1e-12 * (1 + std::abs(lhs[i])));
      CHECK(mx[i] >= *lo - 1e-12);
      CHECK(mx[i] <= *hi + 1e-12);
    }
  }
}

TEST_CASE("baseline removal reproduces low-degree polynomials") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(-2, 2);
  for (int degree = 0; degree <= 2; ++degree) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto t = time_axis(200);
      const double a0 = c(rng), a1 = c(rng), a2 = c(rng);
      std::vector<double> x(t.size());
      for (std::size_t i = 0; i < t.size(); ++i)
        x[i] = a0 + (degree >= 1 ? a1 * t[i] : 0) + (degree >= 2 ? a2 * t[i] * t[i] : 0);
      for (int fit_degree = degree; fit_degree <= 2; ++fit_degree) {
        const auto r = remove_baseline(x, t, all_anchors(x.size()), fit_degree);
        for (double v : r) CHECK(std::abs(v) < 1e-9);
        const auto re = remove_baseline(x, t, edge_anchors(x.size(), 0.1), fit_degree);
        for (double v : re) CHECK(std::abs(v) < 1e-9);
      }
    }
  }
  const std::vector<double> constant(10, 4.0);
  for (double v : remove_baseline(constant, time_axis(10), all_anchors(10), 0)) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("bump isolated by anchored line fit, coefficients match normal equations") {
  const auto t = time_axis(100);
  std::vector<double> x(t.size());
  std::vector<bool> anchors(t.size(), true);
  for (std::size_t i = 0; i < t.size(); ++i) {
    x[i] = 0.3 + 0.05 * t[i];
    if (i >= 40 && i < 60) {
      x[i] += 1.0;
      anchors[i] = false;
    }
  }
  const auto p = fit_baseline(x, t, anchors, 1);
  std::vector<double> at, ax;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (anchors[i]) {
      at.push_back(t[i]);
      ax.push_back(x[i]);
    }
  const auto ref = oracle::polyfit_normal(at, ax, 1);
  CHECK(std::abs(p.coeffs[0] - ref[0]) < 1e-9);
  CHECK(std::abs(p.coeffs[1] - ref[1]) < 1e-9);
  const auto r = remove_baseline(x, t, anchors, 1);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(r[i] - (anchors[i] ? 0.0 : 1.0)) < 1e-9);
}

TEST_CASE("quadratic fit on noisy anchors matches normal equations") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = time_axis(300);
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = 1.0 - 0.02 * t[i] + 0.001 * t[i] * t[i] + noise(rng);
    const auto anchors = edge_anchors(x.size(), 0.2);
    const auto p = fit_baseline(x, t, anchors, 2);
    std::vector<double> at, ax;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (anchors[i]) {
        at.push_back(t[i]);
        ax.push_back(x[i]);
      }
    const auto ref = oracle::polyfit_normal(at, ax, 2);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(p.coeffs[k] - ref[k]) < 1e-9);
  }
}

TEST_CASE("baseline removal is idempotent") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = time_axis(150);
    const auto x = random_series(rng, 150);
    const auto anchors = edge_anchors(150, 0.15);
    for (int degree = 0; degree <= 3; ++degree) {
      const auto once = remove_baseline(x, t, anchors, degree);
      const auto twice = remove_baseline(once, t, anchors, degree);
      for (std::size_t i = 0; i < once.size(); ++i) CHECK(std::abs(once[i] - twice[i]) < 1e-9);
    }
  }
}

TEST_CASE("rank-deficient baselines are rejected") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> same_t{1, 1, 1};
  CHECK_THROWS_AS(fit_baseline(x, same_t, all_anchors(3), 1), std::domain_error);
  CHECK_THROWS_AS(fit_baseline(x, time_axis(3), all_anchors(3), 3), std::domain_error);
  std::vector<bool> one{true, false, false};
  CHECK_THROWS_AS(fit_baseline(x, time_axis(3), one, 1), std::domain_error);
  CHECK_NOTHROW(fit_baseline(x, time_axis(3), all_anchors(3), 2));
}

TEST_CASE("anchor masks") {
  const auto e = edge_anchors(20, 0.1);
  CHECK(std::count(e.begin(), e.end(), true) == 4);
  CHECK(e[0]);
  CHECK(e[1]);
  CHECK_FALSE(e[2]);
  CHECK(e[19]);
  const auto small = edge_anchors(5, 0.1);
  CHECK(std::count(small.begin(), small.end(), true) == 2);

  const auto table = sim::builtin_table(sim::TableId::binary_ethanol);
  const auto s = sim::generate_dataset(table, 1, 1).front().session;
  const auto m = session_anchors(s, FilterConfig{});
  // 10 s of pre-exposure air and the final 10 s of recovery at 10 Hz.
  CHECK(std::count(m.begin(), m.end(), true) == 100 + 100);
  CHECK(m[0]);
  CHECK(m[99]);
  CHECK_FALSE(m[100]);
  CHECK_FALSE(m[500]);
  CHECK_FALSE(m[899]);
  CHECK(m[900]);
  CHECK(m[999]);
}

TEST_CASE("standardizer examples") {
  const auto s = fit_standardizer(Matrix::from_rows({{2, 0}, {2, 2}}));
  CHECK(s.constant[0]);
  CHECK_FALSE(s.constant[1]);
  CHECK(s.mean[1] == 1.0);
  CHECK(s.stddev[1] == 1.0);
  const auto z = s.apply(Matrix::from_rows({{2, 0}, {2, 2}}));
  CHECK(z(0, 0) == 2.0);
  CHECK(z(1, 0) == 2.0);
  CHECK(z(0, 1) == -1.0);
  CHECK(z(1, 1) == 1.0);
  const auto c3 = fit_standardizer(Matrix::from_rows({{2}, {2}, {2}}));
  CHECK(c3.constant[0]);
  CHECK(c3.apply(std::vector<double>{2.0}) == std::vector<double>{2.0});
  CHECK_THROWS(fit_standardizer(Matrix(0, 3)));
}

TEST_CASE("standardized training data has zero mean, unit spread and inverts") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> d(5, 4);
  Matrix x(57, 6);
  for (auto& v : x.data()) v = d(rng);
  for (std::size_t i = 0; i < x.rows(); ++i) x(i, 3) = 7.0;
  const auto s = fit_standardizer(x);
  const auto z = s.apply(x);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) m += z(i, j);
    m /= x.rows();
    for (std::size_t i = 0; i < x.rows(); ++i) v += (z(i, j) - m) * (z(i, j) - m);
    v /= x.rows();
    if (j == 3) {
      CHECK(s.constant[j]);
      continue;
    }
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-9);
  }
  const auto back = s.inverse(z);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) CHECK(std::abs(back(i, j) - x(i, j)) < 1e-9);

  std::stringstream ss;
  write_standardizer(ss, s);
  const auto r = read_standardizer(ss);
  CHECK(r.mean == s.mean);
  CHECK(r.stddev == s.stddev);
  CHECK(r.constant == s.constant);
}

TEST_CASE("session preprocessing and processed CSV") {
  const auto table = sim::builtin_table(sim::TableId::ternary);
  const auto s = sim::generate_dataset(table, 1, 3).front().session;
  FilterConfig cfg;
  const auto p = preprocess_session(s, cfg);
  CHECK(p.t_ms.size() == s.frames.size());
  // Clean-air anchors sit near zero after baseline removal.
  for (std::size_t c = 0; c < kChannelCount; ++c) CHECK(std::abs(p.channels[c][50]) < 0.05);

  std::stringstream ss;
  write_processed_csv(ss, p, cfg);
  const std::string text = ss.str();
  CHECK(text.rfind("# processed window_m=5 baseline_degree=2", 0) == 0);
  CHECK(text.find("\nt_ms,raw1,raw2,raw3,raw4\n") != std::string::npos);
  const auto back = read_processed_csv(ss);
  CHECK(back.t_ms == p.t_ms);
  for (std::size_t c = 0; c < kChannelCount; ++c) CHECK(back.channels[c] == p.channels[c]);

  FilterConfig bad;
  bad.window_m = 4;
  CHECK_THROWS(preprocess_session(s, bad));
  bad = FilterConfig{};
  bad.baseline_degree = 6;
  CHECK_THROWS(bad.validate());
}
