#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "enose/dataset.hpp"
#include "enose/sensor_sim.hpp"
#include "enose/sim_config.hpp"
#include "oracles.hpp"

using namespace enose;
using namespace enose::sim;

namespace {

SensorSpec acetone_only(double a, double b) {
  SensorSpec s;
  s.sens_coeff = {a, 0.0, 0.0};
  s.sens_exp = {b, 1.0, 1.0};
  return s;
}

SensorArray quiet_array() {
  auto arr = default_sensor_array(0.0);
  for (auto& s : arr) s.drift_rate_per_hour = 0.0;
  return arr;
}

// Resistance interval consistent with a floor-quantized divider reading.
std::pair<double, double> resistance_bounds(int raw, double r_load) {
  const double v_lo = raw * 3.3 / 4096.0;
  const double v_hi = (raw + 1) * 3.3 / 4096.0;
  const double r_hi = v_lo > 0 ? r_load * (3.3 / v_lo - 1.0) : INFINITY;
  const double r_lo = r_load * (3.3 / v_hi - 1.0);
  return {r_lo, r_hi};
}

}  // namespace

TEST_CASE("clean air has unit sensitivity") {
  for (const auto& s : default_sensor_array()) CHECK(steady_sensitivity(s, GasMixture{}) == 1.0);
}

TEST_CASE("linear power law") {
  CHECK(steady_sensitivity(acetone_only(0.5, 1.0), {10, 0, 0}) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("sensitivity is monotone in every concentration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coeff(0.0, 0.5), expo(0.05, 1.0), conc(0.0, 300.0), bump(0.0, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    SensorSpec s;
    for (std::size_t g = 0; g < kGasCount; ++g) {
      s.sens_coeff[g] = coeff(rng);
      s.sens_exp[g] = expo(rng);
    }
    GasMixture m{conc(rng), conc(rng), conc(rng)};
    const double base = steady_sensitivity(s, m);
    CHECK(base >= 1.0);
    for (Gas g : kAllGases) {
      GasMixture up = m;
      if (g == Gas::acetone) up.acetone_ppm += bump(rng);
      if (g == Gas::ethanol) up.ethanol_ppm += bump(rng);
      if (g == Gas::methanol) up.methanol_ppm += bump(rng);
      CHECK(steady_sensitivity(s, up) >= base);
    }
  }
}

TEST_CASE("power-law calibration matches a grid-search minimum") {
  const auto& curves = default_target_curves();
  const auto arr = default_sensor_array();
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (Gas g : kAllGases) {
      const auto gi = static_cast<std::size_t>(g);
      const auto& curve = curves[c][gi];
      if (curve.s_max == 0.0) continue;
      std::vector<double> ppm;
      if (g == Gas::acetone) ppm.assign(kAcetoneGradientPpm.begin(), kAcetoneGradientPpm.end());
      else ppm.assign(kInterferentGradientPpm.begin(), kInterferentGradientPpm.end());
      std::vector<double> s;
      for (double p : ppm) s.push_back(curve(p));

      const PowerLaw fit = fit_power_law(ppm, s);
      const auto ref = oracle::power_law_grid(ppm, s);
      CAPTURE(c);
      CAPTURE(gi);
      CHECK(fit.exponent == doctest::Approx(ref.exponent).epsilon(1e-6));
      CHECK(fit.coeff == doctest::Approx(ref.coeff).epsilon(1e-5));
      CHECK(power_law_log_residual(fit, ppm, s) <= ref.rss + 1e-12);
      CHECK(arr[c].sens_coeff[gi] == fit.coeff);
      CHECK(arr[c].sens_exp[gi] == fit.exponent);
    }
  }
}

TEST_CASE("TiO2-like channel at 50 ppm acetone") {
  const auto s = default_sensor_array()[0];
  const double expected = 1.0 + s.sens_coeff[0] * std::pow(50.0, s.sens_exp[0]);
  CHECK(steady_sensitivity(s, {50, 0, 0}) == doctest::Approx(expected).epsilon(1e-14));
  // 50 ppm is a calibration point, so its log residual is bounded by the fit's RSS.
  const auto& curve = default_target_curves()[0][0];
  std::vector<double> ppm(kAcetoneGradientPpm.begin(), kAcetoneGradientPpm.end()), sens;
  for (double p : ppm) sens.push_back(curve(p));
  const double rss = power_law_log_residual({s.sens_coeff[0], s.sens_exp[0]}, ppm, sens);
  CHECK(std::abs(std::log(expected - 1.0) - std::log(curve(50.0) - 1.0)) <= std::sqrt(rss) + 1e-12);
}

TEST_CASE("power-law fit clamps the exponent") {
  const std::vector<double> ppm{1, 2, 4, 8};
  std::vector<double> s;
  for (double p : ppm) s.push_back(1.0 + 0.01 * p * p);
  const auto fit = fit_power_law(ppm, s);
  CHECK(fit.exponent == 1.0);
  const auto ref = oracle::power_law_grid(ppm, s);
  CHECK(fit.coeff == doctest::Approx(ref.coeff).epsilon(1e-9));
}

TEST_CASE("clean-air session quantizes the air divider voltage") {
  auto arr = quiet_array();
  ExposureProtocol p;
  p.phases = {{GasMixture{}, 5.0}};
  const auto frames = simulate_session(arr, p, 3);
  REQUIRE(frames.size() == 50);
  for (const auto& f : frames)
    for (std::size_t c = 0; c < kChannelCount; ++c) CHECK(f.raw[c] == quantize_voltage(1.65));
  CHECK(quantize_voltage(1.65) == 2048);
}

TEST_CASE("quantization is a clamped floor") {
  CHECK(quantize_voltage(0.0) == 0);
  CHECK(quantize_voltage(-1.0) == 0);
  CHECK(quantize_voltage(3.3) == 4095);
  CHECK(quantize_voltage(5.0) == 4095);
  CHECK(quantize_voltage(3.3 / 4096.0 * 100.5) == 100);
}

TEST_CASE("step response decays toward R_air/S") {
  SensorSpec s = default_sensor_array(0.0)[0];
  ExposureProtocol p;
  p.phases = {{GasMixture{}, 10.0}, {GasMixture{50, 0, 0}, 30.0}};
  const auto r = resistance_trajectory(s, p);
  const double r_ss = s.r_air_kohm / steady_sensitivity(s, {50, 0, 0});
  for (std::size_t k = 101; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
  const std::size_t at_5tau = 100 + static_cast<std::size_t>(5 * s.tau_rise_s * 10);
  CHECK(std::abs(r[at_5tau] - r_ss) <= std::exp(-5.0) * (s.r_air_kohm - r_ss) * (1 + 1e-9));
}

TEST_CASE("noise-free channels obey the first-order convergence bound") {
  auto arr = quiet_array();
  const GasMixture mix{100, 20, 0};
  ExposureProtocol p;
  p.phases = {{mix, 40.0}};
  const auto frames = simulate_session(arr, p, 1);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& s = arr[c];
    const double r_ss = s.r_air_kohm / steady_sensitivity(s, mix);
    // The first phase starts at its own steady state.
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const auto [lo, hi] = resistance_bounds(frames[k].raw[c], s.r_air_kohm);
      CHECK(lo <= r_ss + 1e-9);
      CHECK(hi >= r_ss - 1e-9);
    }
  }

  ExposureProtocol step;
  step.phases = {{GasMixture{}, 0.1}, {mix, 40.0}};
  const auto f2 = simulate_session(arr, step, 1);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& s = arr[c];
    const double r_ss = s.r_air_kohm / steady_sensitivity(s, mix);
    const double r0 = s.r_air_kohm;
    for (std::size_t k = 1; k < f2.size(); ++k) {
      const double t = (k - 1) / 10.0;
      const double bound = std::abs(r0 - r_ss) * std::exp(-t / s.tau_rise_s);
      const auto [lo, hi] = resistance_bounds(f2[k].raw[c], s.r_air_kohm);
      // Some resistance consistent with the reading lies within the bound.
      const double nearest = std::clamp(r_ss, lo, hi);
      CHECK(std::abs(nearest - r_ss) <= bound + 1e-9);
    }
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  const auto arr = default_sensor_array();
  const auto proto = StandardProtocol{}.build({50, 10, 0});
  CHECK(simulate_session(arr, proto, 7) == simulate_session(arr, proto, 7));
  CHECK_FALSE(simulate_session(arr, proto, 7) == simulate_session(arr, proto, 8));
}

TEST_CASE("raw counts stay in range and timestamps increase") {
  auto arr = default_sensor_array(0.3);
  arr[1].drift_rate_per_hour = 50.0;
  const auto frames = simulate_session(arr, StandardProtocol{}.build({300, 200, 200}), 5);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (auto v : frames[k].raw) {
      CHECK(v <= 4095);
      const double volts = v * 3.3 / 4096.0;
      CHECK(volts >= 0.0);
      CHECK(volts <= 3.3);
    }
    if (k) CHECK(frames[k].t_ms > frames[k - 1].t_ms);
  }
}

TEST_CASE("protocol sample count is the ceiling of duration times rate") {
  ExposureProtocol p;
  p.sample_rate_hz = 3.0;
  p.phases = {{GasMixture{}, 1.1}, {GasMixture{1, 0, 0}, 0.5}};
  CHECK(p.total_samples() == 5);
  CHECK(StandardProtocol{}.build({}).total_samples() == 1000);
  p.phases.clear();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS(simulate_session(default_sensor_array(), p, 1));
}

TEST_CASE("spec validation") {
  SensorSpec s = acetone_only(0.1, 0.5);
  CHECK_NOTHROW(s.validate());
  s.r_air_kohm = 0;
  CHECK_THROWS(s.validate());
  s = acetone_only(0.0, 0.5);
  CHECK_THROWS(s.validate());
  s = acetone_only(0.1, 1.5);
  CHECK_THROWS(s.validate());
  s = acetone_only(0.1, 0.5);
  s.tau_fall_s = -1;
  CHECK_THROWS(s.validate());
  CHECK_THROWS(GasMixture{-1, 0, 0}.validate());
  CHECK_THROWS(GasMixture{NAN, 0, 0}.validate());
}

TEST_CASE("built-in tables reproduce the published rows and splits") {
  const auto t2 = builtin_table(TableId::binary_ethanol);
  CHECK(t2.n_train == 600);
  CHECK(t2.n_test == 80);
  REQUIRE(t2.rows.size() == 8);
  CHECK(t2.rows[0] == GasMixture{100, 0, 0});
  CHECK(t2.rows[5] == GasMixture{49.5, 0.5, 0});
  CHECK(t2.rows[7] == GasMixture{25, 25, 0});

  const auto t3 = builtin_table(TableId::binary_methanol);
  CHECK(t3.n_train == 700);
  CHECK(t3.n_test == 100);
  CHECK(t3.rows[2] == GasMixture{90, 0, 10});

  const auto t4 = builtin_table(TableId::ternary);
  CHECK(t4.n_train == 550);
  CHECK(t4.n_test == 50);
  CHECK(t4.rows[5] == GasMixture{98, 0.5, 0.5});
  CHECK(t4.rows[1] == GasMixture{198, 1, 1});
  REQUIRE_FALSE(t4.notes.empty());
}

TEST_CASE("dataset sizes per table") {
  SUBCASE("binary ethanol, 85 per row") {
    CHECK(generate_dataset(builtin_table(TableId::binary_ethanol), 85, 1).size() == 680);
  }
  SUBCASE("binary methanol, 100 per row") {
    CHECK(generate_dataset(builtin_table(TableId::binary_methanol), 100, 1).size() == 800);
  }
  SUBCASE("ternary, 75 per row") {
    CHECK(generate_dataset(builtin_table(TableId::ternary), 75, 1).size() == 600);
  }
  CHECK_THROWS_AS(generate_dataset(builtin_table(TableId::ternary), 0, 1), std::invalid_argument);
}

TEST_CASE("row allocation spreads the remainder") {
  const auto a = allocate_rows(682, 8);
  CHECK(a[0] == 86);
  CHECK(a[1] == 86);
  CHECK(a[2] == 85);
  std::size_t sum = 0;
  for (auto v : a) sum += v;
  CHECK(sum == 682);
}

TEST_CASE("row variants and labels") {
  const std::vector<Gas> binary{Gas::acetone, Gas::ethanol};
  auto v = row_variants({90, 10, 0}, binary);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == GasMixture{90, 10, 0});
  CHECK(v[1] == GasMixture{10, 90, 0});
  CHECK(v[1].dominant() == Gas::ethanol);
  CHECK(row_variants({50, 50, 0}, binary).size() == 1);
  CHECK(row_variants({100, 0, 0}, binary).size() == 2);

  const std::vector<Gas> ternary{Gas::acetone, Gas::ethanol, Gas::methanol};
  const auto t = row_variants({180, 10, 10}, ternary);
  REQUIRE(t.size() == 3);
  CHECK(t[2] == GasMixture{10, 10, 180});

  const auto data = generate_dataset(builtin_table(TableId::ternary), 3, 9);
  std::set<int> labels;
  for (const auto& s : data) {
    labels.insert(s.session.meta.label);
    CHECK(s.session.meta.label == label_of(s.session.meta.mixture->dominant()));
  }
  CHECK(labels == std::set<int>{1, 2, 3});
}

TEST_CASE("dataset is deterministic and sessions are independent") {
  const auto table = builtin_table(TableId::binary_ethanol);
  const auto a = generate_dataset(table, 2, 4);
  const auto b = generate_dataset(table, 2, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].session == b[i].session);
  CHECK_FALSE(a[0].session.frames == a[1].session.frames);
  CHECK(session_seed(1, "x", 0, 0) != session_seed(1, "x", 0, 1));
  CHECK(session_seed(1, "x", 0, 0) != session_seed(1, "y", 0, 0));
}

TEST_CASE("table names") {
  CHECK(parse_table_name("binary-ethanol") == TableId::binary_ethanol);
  CHECK(parse_table_name("binary_methanol") == TableId::binary_methanol);
  CHECK(parse_table_name("ternary") == TableId::ternary);
  CHECK_FALSE(parse_table_name("quaternary").has_value());
  CHECK(table_name(TableId::binary_ethanol) == "binary-ethanol");
}

TEST_CASE("simulator configuration file") {
  const auto kv = KeyValueConfig::parse_string(
      "# one session\nseed = 9\nacetone_ppm = 20\nnoise_sigma = 0\nsensor2.tau_rise_s = 2.5\n"
      "sensor4.methanol_exp = 0.5\n");
  const auto cfg = SimulationConfig::from_config(kv);
  CHECK(cfg.seed == 9);
  CHECK(cfg.mixture.acetone_ppm == 20);
  CHECK(cfg.sensors[1].tau_rise_s == 2.5);
  CHECK(cfg.sensors[3].sens_exp[2] == 0.5);
  for (const auto& s : cfg.sensors) CHECK(s.noise_sigma == 0.0);
  const auto session = cfg.run();
  CHECK(session.meta.label == 1);
  CHECK(session.frames.size() == 1000);
  CHECK(session == cfg.run());

  CHECK_THROWS(SimulationConfig::from_config(KeyValueConfig::parse_string("bogus = 1\n")));
  CHECK_THROWS(SimulationConfig::from_config(KeyValueConfig::parse_string("sensor5.tau_rise_s = 1\n")));
  CHECK_THROWS(SimulationConfig::from_config(KeyValueConfig::parse_string("sensor1.tau_rise_s = -1\n")));
  CHECK(SimulationConfig{}.run().meta.label == 0);
}
