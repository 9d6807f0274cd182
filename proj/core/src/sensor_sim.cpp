#include "enose/sensor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace enose {

std::string_view gas_name(Gas g) noexcept {
  switch (g) {
    case Gas::acetone: return "acetone";
    case Gas::ethanol: return "ethanol";
    case Gas::methanol: return "methanol";
  }
  return "unknown";
}

void GasMixture::validate() const {
  for (Gas g : kAllGases) {
    const double c = (*this)[g];
    if (!std::isfinite(c) || c < 0.0)
      throw std::invalid_argument("GasMixture: " + std::string(gas_name(g)) +
                                  " concentration must be finite and >= 0");
  }
}

Gas GasMixture::dominant() const noexcept {
  Gas best = Gas::acetone;
  for (Gas g : kAllGases)
    if ((*this)[g] > (*this)[best]) best = g;
  return best;
}

}  // namespace enose

namespace enose::sim {

void SensorSpec::validate() const {
  if (!(r_air_kohm > 0.0)) throw std::invalid_argument("SensorSpec: r_air must be > 0");
  if (!(tau_rise_s > 0.0)) throw std::invalid_argument("SensorSpec: tau_rise must be > 0");
  if (!(tau_fall_s > 0.0)) throw std::invalid_argument("SensorSpec: tau_fall must be > 0");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SensorSpec: noise_sigma must be >= 0");
  if (!std::isfinite(drift_rate_per_hour))
    throw std::invalid_argument("SensorSpec: drift_rate must be finite");
  bool any = false;
  for (std::size_t g = 0; g < kGasCount; ++g) {
    if (!(sens_coeff[g] >= 0.0) || !std::isfinite(sens_coeff[g]))
      throw std::invalid_argument("SensorSpec: sensitivity coefficients must be >= 0");
    if (!(sens_exp[g] > 0.0 && sens_exp[g] <= 1.0))
      throw std::invalid_argument("SensorSpec: sensitivity exponents must lie in (0, 1]");
    any = any || sens_coeff[g] > 0.0;
  }
  if (!any) throw std::invalid_argument("SensorSpec: sensor responds to no gas");
}

std::size_t ExposureProtocol::total_samples() const {
  double seconds = 0.0;
  for (const auto& p : phases) seconds += p.duration_s;
  const double exact = seconds * sample_rate_hz;
  const double nearest = std::round(exact);
  // Absorb round-off so that e.g. 100 s at 10 Hz gives exactly 1000 samples.
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, nearest))
    return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(exact));
}

void ExposureProtocol::validate() const {
  if (phases.empty()) throw std::invalid_argument("ExposureProtocol: no phases");
  if (!(sample_rate_hz > 0.0) || sample_rate_hz > 1000.0)
    throw std::invalid_argument("ExposureProtocol: sample rate must be in (0, 1000] Hz");
  for (const auto& p : phases) {
    if (!(p.duration_s > 0.0) || !std::isfinite(p.duration_s))
      throw std::invalid_argument("ExposureProtocol: phase durations must be > 0");
    p.mixture.validate();
  }
}

double steady_sensitivity(const SensorSpec& spec, const GasMixture& mix) {
  double s = 1.0;
  for (Gas g : kAllGases) {
    const auto i = static_cast<std::size_t>(g);
    const double c = mix[g];
    if (spec.sens_coeff[i] > 0.0 && c > 0.0) s += spec.sens_coeff[i] * std::pow(c, spec.sens_exp[i]);
  }
  return s;
}

double divider_voltage(double r_sensor, double r_load) {
  return kAdcReference * r_load / (r_load + r_sensor);
}

std::uint16_t quantize_voltage(double volts) {
  const double code = std::floor(volts / kAdcReference * 4096.0);
  if (!(code > 0.0)) return 0;
  if (code >= kAdcMax) return kAdcMax;
  return static_cast<std::uint16_t>(code);
}

std::int64_t sample_time_ms(std::size_t index, double sample_rate_hz) {
  return std::llround(static_cast<double>(index) * 1000.0 / sample_rate_hz);
}

std::vector<double> resistance_trajectory(const SensorSpec& spec, const ExposureProtocol& proto) {
  proto.validate();
  const std::size_t n = proto.total_samples();
  std::vector<double> r(n);

  double phase_start = 0.0;
  double r_start = spec.r_air_kohm / steady_sensitivity(spec, proto.phases.front().mixture);
  double prev_s = steady_sensitivity(spec, proto.phases.front().mixture);
  std::size_t k = 0;
  for (std::size_t p = 0; p < proto.phases.size(); ++p) {
    const auto& phase = proto.phases[p];
    const double s = steady_sensitivity(spec, phase.mixture);
    const double r_ss = spec.r_air_kohm / s;
    const double tau = s >= prev_s ? spec.tau_rise_s : spec.tau_fall_s;
    const double phase_end = phase_start + phase.duration_s;
    const bool last = p + 1 == proto.phases.size();
    for (; k < n; ++k) {
      const double t = static_cast<double>(k) / proto.sample_rate_hz;
      if (!last && t >= phase_end) break;
      r[k] = r_ss + (r_start - r_ss) * std::exp(-(t - phase_start) / tau);
    }
    r_start = r_ss + (r_start - r_ss) * std::exp(-phase.duration_s / tau);
    phase_start = phase_end;
    prev_s = s;
  }
  return r;
}

std::vector<SensorFrame> simulate_session(const SensorArray& specs, const ExposureProtocol& proto,
                                          std::uint64_t seed) {
  proto.validate();
  for (const auto& s : specs) s.validate();

  std::array<std::vector<double>, kChannelCount> clean;
  for (std::size_t c = 0; c < kChannelCount; ++c) clean[c] = resistance_trajectory(specs[c], proto);

  const std::size_t n = proto.total_samples();
  std::vector<SensorFrame> frames(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    const double hours = static_cast<double>(k) / proto.sample_rate_hz / 3600.0;
    frames[k].t_ms = sample_time_ms(k, proto.sample_rate_hz);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto& spec = specs[c];
      const double z = unit(rng);
      double r = clean[c][k] + spec.drift_rate_per_hour * spec.r_air_kohm * hours;
      r *= 1.0 + spec.noise_sigma * z;
      r = std::max(r, 1e-9);
      frames[k].raw[c] = quantize_voltage(divider_voltage(r, spec.r_air_kohm));
    }
  }
  return frames;
}

double TargetCurve::operator()(double ppm) const {
  return 1.0 + s_max * (1.0 - std::exp(-ppm / c_scale_ppm));
}

double power_law_log_residual(const PowerLaw& law, std::span<const double> ppm,
                              std::span<const double> sensitivity) {
  double rss = 0.0;
  for (std::size_t i = 0; i < ppm.size(); ++i) {
    if (!(sensitivity[i] > 1.0) || !(ppm[i] > 0.0)) continue;
    const double resid = std::log(sensitivity[i] - 1.0) -
                         (std::log(law.coeff) + law.exponent * std::log(ppm[i]));
    rss += resid * resid;
  }
  return rss;
}

PowerLaw fit_power_law(std::span<const double> ppm, std::span<const double> sensitivity) {
  if (ppm.size() != sensitivity.size())
    throw std::invalid_argument("fit_power_law: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ppm.size(); ++i) {
    if (sensitivity[i] > 1.0 && ppm[i] > 0.0) {
      x.push_back(std::log(ppm[i]));
      y.push_back(std::log(sensitivity[i] - 1.0));
    }
  }
  if (x.empty()) return {0.0, 1.0};
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  double b = sxx > 0.0 ? sxy / sxx : 1.0;
  double log_a = my - b * mx;
  if (b > 1.0 || b <= 0.0) {
    b = std::clamp(b, 1e-3, 1.0);
    log_a = my - b * mx;
  }
  return {std::exp(log_a), b};
}

const std::array<std::array<TargetCurve, kGasCount>, kChannelCount>& default_target_curves() {
  // Rows: TiO2 film, MP502-like, MQ3-like, MQ153-like. Columns: acetone, ethanol, methanol.
  static const std::array<std::array<TargetCurve, kGasCount>, kChannelCount> curves{{
      {{{12.0, 80.0}, {2.0, 120.0}, {1.2, 150.0}}},
      {{{3.0, 100.0}, {5.0, 90.0}, {4.0, 110.0}}},
      {{{1.5, 100.0}, {8.0, 80.0}, {2.5, 100.0}}},
      {{{2.0, 100.0}, {2.5, 100.0}, {7.0, 90.0}}},
  }};
  return curves;
}

SensorArray default_sensor_array(double noise_sigma) {
  static constexpr std::array<const char*, kChannelCount> names{"TiO2", "MP502", "MQ3", "MQ153"};
  static constexpr std::array<double, kChannelCount> r_air{50.0, 20.0, 30.0, 40.0};
  static constexpr std::array<double, kChannelCount> drift{0.20, 0.30, 0.15, 0.25};

  const auto& curves = default_target_curves();
  SensorArray arr;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    auto& s = arr[c];
    s.id = static_cast<int>(c);
    s.name = names[c];
    s.r_air_kohm = r_air[c];
    s.tau_rise_s = 4.0;
    s.tau_fall_s = 10.0;
    s.drift_rate_per_hour = drift[c];
    s.noise_sigma = noise_sigma;
    for (std::size_t g = 0; g < kGasCount; ++g) {
      const auto& grad = g == 0 ? std::span<const double>(kAcetoneGradientPpm)
                                : std::span<const double>(kInterferentGradientPpm);
      std::vector<double> target(grad.size());
      std::transform(grad.begin(), grad.end(), target.begin(), curves[c][g]);
      const PowerLaw law = fit_power_law(grad, target);
      s.sens_coeff[g] = law.coeff;
      s.sens_exp[g] = law.exponent;
    }
  }
  return arr;
}

ExposureProtocol StandardProtocol::build(const GasMixture& mix) const {
  ExposureProtocol p;
  p.sample_rate_hz = sample_rate_hz;
  p.phases = {{GasMixture{}, pre_air_s}, {mix, exposure_s}, {GasMixture{}, recovery_s}};
  return p;
}

}  // namespace enose::sim
