#include "enose/sim_config.hpp"

#include <stdexcept>

namespace enose::sim {

namespace {

constexpr const char* kGlobalKeys[] = {"seed",       "acetone_ppm", "ethanol_ppm",   "methanol_ppm",
                                       "noise_sigma", "drift_rate_per_hour", "pre_air_s", "exposure_s",
                                       "recovery_s",  "sample_rate_hz"};

bool is_channel_key(const std::string& key, std::size_t& channel, std::string& field) {
  if (key.rfind("sensor", 0) != 0 || key.size() < 9 || key[7] != '.') return false;
  const char d = key[6];
  if (d < '1' || d > '4') return false;
  channel = static_cast<std::size_t>(d - '1');
  field = key.substr(8);
  return true;
}

}  // namespace

SimulationConfig SimulationConfig::from_config(const KeyValueConfig& kv) {
  SimulationConfig c;
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.mixture.acetone_ppm = kv.get_double("acetone_ppm", 0.0);
  c.mixture.ethanol_ppm = kv.get_double("ethanol_ppm", 0.0);
  c.mixture.methanol_ppm = kv.get_double("methanol_ppm", 0.0);
  c.protocol.pre_air_s = kv.get_double("pre_air_s", c.protocol.pre_air_s);
  c.protocol.exposure_s = kv.get_double("exposure_s", c.protocol.exposure_s);
  c.protocol.recovery_s = kv.get_double("recovery_s", c.protocol.recovery_s);
  c.protocol.sample_rate_hz = kv.get_double("sample_rate_hz", c.protocol.sample_rate_hz);
  for (auto& s : c.sensors) {
    s.noise_sigma = kv.get_double("noise_sigma", s.noise_sigma);
    s.drift_rate_per_hour = kv.get_double("drift_rate_per_hour", s.drift_rate_per_hour);
  }

  for (const auto& [key, value] : kv.entries()) {
    bool global = false;
    for (const char* g : kGlobalKeys) global = global || key == g;
    if (global) continue;
    std::size_t ch = 0;
    std::string field;
    if (!is_channel_key(key, ch, field)) throw std::invalid_argument("config: unknown key '" + key + "'");
    SensorSpec& s = c.sensors[ch];
    const double v = kv.get_double(key, 0.0);
    if (field == "r_air_kohm") s.r_air_kohm = v;
    else if (field == "tau_rise_s") s.tau_rise_s = v;
    else if (field == "tau_fall_s") s.tau_fall_s = v;
    else if (field == "drift_rate_per_hour") s.drift_rate_per_hour = v;
    else if (field == "noise_sigma") s.noise_sigma = v;
    else {
      bool matched = false;
      for (Gas g : kAllGases) {
        const std::string name(gas_name(g));
        const auto gi = static_cast<std::size_t>(g);
        if (field == name + "_coeff") {
          s.sens_coeff[gi] = v;
          matched = true;
        } else if (field == name + "_exp") {
          s.sens_exp[gi] = v;
          matched = true;
        }
      }
      if (!matched) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

void SimulationConfig::validate() const {
  for (const auto& s : sensors) s.validate();
  mixture.validate();
  protocol.build(mixture).validate();
}

acq::Session SimulationConfig::run() const {
  validate();
  return simulate_labeled_session(sensors, protocol, mixture, seed);
}

}  // namespace enose::sim
