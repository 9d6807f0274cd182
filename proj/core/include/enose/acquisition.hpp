#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "enose/types.hpp"

namespace enose::acq {

inline constexpr std::string_view kSessionHeader = "t_ms,raw1,raw2,raw3,raw4";
inline constexpr double kDefaultSampleRateHz = 10.0;
/// Streams with a larger fraction of malformed lines are rejected.
inline constexpr double kMaxMalformedFraction = 0.10;

/// Exposure interval within a session, in session milliseconds [start, end).
struct ExposureWindow {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  friend bool operator==(const ExposureWindow&, const ExposureWindow&) = default;
};

struct SessionMeta {
  int label = 0;
  std::optional<GasMixture> mixture;
  double sample_rate_hz = kDefaultSampleRateHz;
  std::optional<ExposureWindow> exposure;

  friend bool operator==(const SessionMeta&, const SessionMeta&) = default;
};

struct Session {
  std::vector<SensorFrame> frames;
  SessionMeta meta;

  friend bool operator==(const Session&, const Session&) = default;
};

/// Raised when a stream cannot become a session. Carries the line counts.
class StreamError : public std::runtime_error {
 public:
  StreamError(const std::string& what, std::size_t malformed, std::size_t data_lines)
      : std::runtime_error(what), malformed_(malformed), data_lines_(data_lines) {}
  std::size_t malformed() const noexcept { return malformed_; }
  std::size_t data_lines() const noexcept { return data_lines_; }

 private:
  std::size_t malformed_;
  std::size_t data_lines_;
};

/// raw * 3.3 / 4096, evaluated as raw * 33 / 40960 so the result is the
/// correctly rounded double of the exact rational. Throws std::range_error
/// outside [0, 4095].
double adc_to_voltage(int raw);

/// One channel reading as parsed from a line; empty field = missing.
using RawReading = std::optional<std::uint16_t>;

struct ParsedLine {
  std::int64_t t_ms = 0;
  std::array<RawReading, kChannelCount> raw{};
};

/// Parses `t_ms,raw1,raw2,raw3,raw4`. Returns nullopt for malformed lines:
/// wrong field count, non-integer text, negative time, counts outside
/// [0, 4095], or every channel missing.
std::optional<ParsedLine> parse_line(std::string_view line);

struct ParseReport {
  Session session;
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  std::size_t imputed = 0;
};

/// Builds a session from text lines. Blank lines, '#' comments and the header
/// are skipped. Missing channel readings are filled by impute_missing.
/// Throws StreamError when more than 10% of data lines are malformed, when
/// timestamps are not strictly increasing, or when no frame survives.
ParseReport parse_stream(std::span<const std::string> lines);
ParseReport parse_stream(std::istream& in);

/// Fills each gap with the mean of the nearest present values on either side;
/// gaps at the ends copy the single nearest present value. Throws
/// std::invalid_argument when no value is present.
std::vector<double> impute_missing(std::span<const std::optional<double>> series);

void write_session_csv(std::ostream& out, const Session& session);
std::string session_csv_string(const Session& session);

void write_meta(std::ostream& out, const SessionMeta& meta);
SessionMeta read_meta(std::istream& in);

/// Writes `<path>` and `<path minus extension>.meta`.
void save_session(const std::filesystem::path& csv_path, const Session& session);
/// Reads a session CSV and, when present, its `.meta` sidecar.
Session load_session(const std::filesystem::path& csv_path);

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

/// Channel voltages, one vector per channel.
std::array<std::vector<double>, kChannelCount> channel_voltages(const Session& session);
std::vector<double> timestamps_seconds(const Session& session);

}  // namespace enose::acq
