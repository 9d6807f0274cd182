#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace enose {

inline constexpr std::size_t kChannelCount = 4;
inline constexpr std::size_t kGasCount = 3;
inline constexpr int kAdcMax = 4095;
inline constexpr double kAdcReference = 3.3;

enum class Gas : std::uint8_t { acetone = 0, ethanol = 1, methanol = 2 };

inline constexpr std::array<Gas, kGasCount> kAllGases{Gas::acetone, Gas::ethanol, Gas::methanol};

std::string_view gas_name(Gas g) noexcept;

/// Class codes used on the wire and in reports: 0 = unknown, 1 = acetone,
/// 2 = ethanol, 3 = methanol.
inline constexpr int label_of(Gas g) noexcept { return static_cast<int>(g) + 1; }

/// Concentrations in ppm of the three studied gases.
struct GasMixture {
  double acetone_ppm = 0.0;
  double ethanol_ppm = 0.0;
  double methanol_ppm = 0.0;

  double operator[](Gas g) const noexcept {
    switch (g) {
      case Gas::acetone: return acetone_ppm;
      case Gas::ethanol: return ethanol_ppm;
      case Gas::methanol: return methanol_ppm;
    }
    return 0.0;
  }
  double& operator[](Gas g) noexcept {
    switch (g) {
      case Gas::ethanol: return ethanol_ppm;
      case Gas::methanol: return methanol_ppm;
      default: return acetone_ppm;
    }
  }

  /// Throws std::invalid_argument unless every concentration is finite and >= 0.
  void validate() const;

  /// Gas with the largest concentration; ties resolve to the lower class code.
  Gas dominant() const noexcept;

  friend bool operator==(const GasMixture&, const GasMixture&) = default;
};

/// One timestamped reading of the four ADC channels.
struct SensorFrame {
  std::int64_t t_ms = 0;
  std::array<std::uint16_t, kChannelCount> raw{};

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

/// Error raised by a multi-stage pipeline; `stage()` names the failing stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace enose
