#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enose/types.hpp"

namespace enose::sim {

/// Static and dynamic parameters of one metal-oxide sensor channel.
///
/// The steady-state sensitivity to a mixture is the additive power law
/// S = 1 + sum_g a_g * C_g^b_g, and the sensor resistance in the mixture is
/// r_air / S.
struct SensorSpec {
  int id = 0;
  std::string name;
  double r_air_kohm = 10.0;
  std::array<double, kGasCount> sens_coeff{};
  std::array<double, kGasCount> sens_exp{1.0, 1.0, 1.0};
  double tau_rise_s = 4.0;
  double tau_fall_s = 10.0;
  /// Fraction of r_air added per hour of session time.
  double drift_rate_per_hour = 0.0;
  /// Standard deviation of the multiplicative N(1, sigma^2) noise.
  double noise_sigma = 0.0;

  void validate() const;
};

using SensorArray = std::array<SensorSpec, kChannelCount>;

struct ExposurePhase {
  GasMixture mixture;
  double duration_s = 0.0;
};

struct ExposureProtocol {
  std::vector<ExposurePhase> phases;
  double sample_rate_hz = 10.0;

  /// ceil(sum(duration) * rate)
  std::size_t total_samples() const;
  void validate() const;
};

double steady_sensitivity(const SensorSpec& spec, const GasMixture& mix);

/// Divider output 3.3 * R_load / (R_load + R_sensor).
double divider_voltage(double r_sensor, double r_load);

/// Truncating 12-bit conversion of a voltage on a 3.3 V reference,
/// clamped to [0, 4095].
std::uint16_t quantize_voltage(double volts);

/// Sample timestamp in whole milliseconds.
std::int64_t sample_time_ms(std::size_t index, double sample_rate_hz);

/// Noise-free resistance trajectory of one channel, one value per sample.
std::vector<double> resistance_trajectory(const SensorSpec& spec, const ExposureProtocol& proto);

/// Frames for a whole protocol. Deterministic in (specs, proto, seed).
std::vector<SensorFrame> simulate_session(const SensorArray& specs, const ExposureProtocol& proto,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Calibration

struct PowerLaw {
  double coeff = 0.0;
  double exponent = 1.0;
};

/// Saturating target response S(C) = 1 + s_max * (1 - exp(-C / c_half)).
/// s_max == 0 means the sensor is blind to the gas.
struct TargetCurve {
  double s_max = 0.0;
  double c_scale_ppm = 100.0;

  double operator()(double ppm) const;
};

/// Concentration gradient used for the acetone calibration runs (ppm).
inline constexpr std::array<double, 12> kAcetoneGradientPpm{1,  2,  4,   6,   8,   10,
                                                            20, 50, 100, 150, 200, 300};
/// Gradient used for the ethanol and methanol runs (ppm).
inline constexpr std::array<double, 6> kInterferentGradientPpm{1, 10, 20, 50, 100, 200};

/// Least-squares fit of log(S - 1) = log(a) + b log(C). The exponent is
/// clamped into (0, 1]; if clamped, the coefficient is refit for that exponent.
PowerLaw fit_power_law(std::span<const double> ppm, std::span<const double> sensitivity);

/// The residual sum of squares minimised by fit_power_law.
double power_law_log_residual(const PowerLaw& law, std::span<const double> ppm,
                              std::span<const double> sensitivity);

/// Target curves for the default array, indexed [channel][gas].
const std::array<std::array<TargetCurve, kGasCount>, kChannelCount>& default_target_curves();

/// The four default channels: a TiO2-like acetone-selective sensor and three
/// interferent-leaning commercial-style sensors. Coefficients come from
/// fitting default_target_curves().
SensorArray default_sensor_array(double noise_sigma = 0.01);

inline constexpr double kDefaultNoiseSigma = 0.01;

/// Stabilise in air, expose for `exposure_s`, recover in air.
struct StandardProtocol {
  double pre_air_s = 10.0;
  double exposure_s = 30.0;
  double recovery_s = 60.0;
  double sample_rate_hz = 10.0;

  ExposureProtocol build(const GasMixture& mix) const;
};

}  // namespace enose::sim
