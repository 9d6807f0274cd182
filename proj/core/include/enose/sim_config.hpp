#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "enose/dataset.hpp"
#include "enose/kv_config.hpp"

namespace enose::sim {

/// Settings for a single simulated session, loadable from `key = value` text.
///
/// Global keys: seed, acetone_ppm, ethanol_ppm, methanol_ppm, noise_sigma,
/// drift_rate_per_hour, pre_air_s, exposure_s, recovery_s, sample_rate_hz.
/// Per-channel keys use a `sensorN.` prefix (N = 1..4): r_air_kohm,
/// tau_rise_s, tau_fall_s, drift_rate_per_hour, noise_sigma,
/// {acetone,ethanol,methanol}_coeff and {acetone,ethanol,methanol}_exp.
struct SimulationConfig {
  SensorArray sensors = default_sensor_array();
  StandardProtocol protocol{};
  GasMixture mixture{};
  std::uint64_t seed = 1;

  /// Unknown keys are rejected; the result is validated.
  static SimulationConfig from_config(const KeyValueConfig& kv);
  void validate() const;
  acq::Session run() const;
};

}  // namespace enose::sim
