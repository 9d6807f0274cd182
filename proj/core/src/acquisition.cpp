#include "enose/acquisition.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "enose/kv_config.hpp"

namespace enose::acq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#' || line == kSessionHeader;
}

}  // namespace

double adc_to_voltage(int raw) {
  if (raw < 0 || raw > kAdcMax)
    throw std::range_error("adc_to_voltage: count " + std::to_string(raw) + " outside [0, 4095]");
  return static_cast<double>(raw * 33) / 40960.0;
}

std::optional<ParsedLine> parse_line(std::string_view line) {
  std::array<std::string_view, kChannelCount + 1> fields;
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (count == fields.size()) return std::nullopt;
    fields[count++] = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                       : comma - pos);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (count != fields.size()) return std::nullopt;

  ParsedLine out;
  if (!parse_int(fields[0], out.t_ms) || out.t_ms < 0) return std::nullopt;
  bool any = false;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto f = trim(fields[c + 1]);
    if (f.empty()) continue;
    int v = 0;
    if (!parse_int(f, v) || v < 0 || v > kAdcMax) return std::nullopt;
    out.raw[c] = static_cast<std::uint16_t>(v);
    any = true;
  }
  if (!any) return std::nullopt;
  return out;
}

std::vector<double> impute_missing(std::span<const std::optional<double>> series) {
  std::vector<double> out(series.size());
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i]) continue;
    out[i] = *series[i];
    const std::size_t gap_begin = prev ? *prev + 1 : 0;
    const double fill = prev ? 0.5 * (*series[*prev] + *series[i]) : *series[i];
    for (std::size_t j = gap_begin; j < i; ++j) out[j] = fill;
    prev = i;
  }
  if (!prev) throw std::invalid_argument("impute_missing: series has no present value");
  for (std::size_t j = *prev + 1; j < series.size(); ++j) out[j] = *series[*prev];
  return out;
}

ParseReport parse_stream(std::span<const std::string> lines) {
  ParseReport report;
  std::vector<ParsedLine> parsed;
  parsed.reserve(lines.size());
  for (const auto& line : lines) {
    if (skippable(line)) continue;
    ++report.data_lines;
    if (auto p = parse_line(line)) parsed.push_back(*p);
    else ++report.malformed;
  }

  if (report.data_lines > 0 &&
      static_cast<double>(report.malformed) >
          kMaxMalformedFraction * static_cast<double>(report.data_lines)) {
    throw StreamError("stream rejected: " + std::to_string(report.malformed) + " of " +
                          std::to_string(report.data_lines) + " data lines malformed",
                      report.malformed, report.data_lines);
  }
  if (parsed.empty())
    throw StreamError("stream rejected: no valid frames", report.malformed, report.data_lines);

  for (std::size_t i = 1; i < parsed.size(); ++i) {
    if (parsed[i].t_ms <= parsed[i - 1].t_ms)
      throw StreamError("stream rejected: timestamp " + std::to_string(parsed[i].t_ms) +
                            " does not increase (frame " + std::to_string(i) + ")",
                        report.malformed, report.data_lines);
  }

  auto& frames = report.session.frames;
  frames.resize(parsed.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) frames[i].t_ms = parsed[i].t_ms;

  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::vector<std::optional<double>> series(parsed.size());
    bool gaps = false;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (parsed[i].raw[c]) series[i] = *parsed[i].raw[c];
      else gaps = true;
    }
    if (!gaps) {
      for (std::size_t i = 0; i < parsed.size(); ++i) frames[i].raw[c] = *parsed[i].raw[c];
      continue;
    }
    std::vector<double> filled;
    try {
      filled = impute_missing(series);
    } catch (const std::invalid_argument&) {
      throw StreamError("stream rejected: channel " + std::to_string(c + 1) + " has no readings",
                        report.malformed, report.data_lines);
    }
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (!parsed[i].raw[c]) ++report.imputed;
      frames[i].raw[c] = static_cast<std::uint16_t>(std::lround(filled[i]));
    }
  }
  return report;
}

ParseReport parse_stream(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return parse_stream(lines);
}

void write_session_csv(std::ostream& out, const Session& session) {
  out << kSessionHeader << '\n';
  for (const auto& f : session.frames) {
    out << f.t_ms;
    for (auto r : f.raw) out << ',' << r;
    out << '\n';
  }
}

std::string session_csv_string(const Session& session) {
  std::ostringstream os;
  write_session_csv(os, session);
  return os.str();
}

void write_meta(std::ostream& out, const SessionMeta& meta) {
  out << "label=" << meta.label << '\n';
  if (meta.mixture) {
    out << "acetone_ppm=" << format_double(meta.mixture->acetone_ppm) << '\n';
    out << "ethanol_ppm=" << format_double(meta.mixture->ethanol_ppm) << '\n';
    out << "methanol_ppm=" << format_double(meta.mixture->methanol_ppm) << '\n';
  }
  out << "sample_rate_hz=" << format_double(meta.sample_rate_hz) << '\n';
  if (meta.exposure) {
    out << "exposure_start_ms=" << meta.exposure->start_ms << '\n';
    out << "exposure_end_ms=" << meta.exposure->end_ms << '\n';
  }
}

SessionMeta read_meta(std::istream& in) {
  const KeyValueConfig kv = KeyValueConfig::parse(in);
  SessionMeta meta;
  meta.label = static_cast<int>(kv.get_int("label", 0));
  if (meta.label < 0 || meta.label > 3) throw std::invalid_argument("meta: label must be 0..3");
  if (kv.contains("acetone_ppm") || kv.contains("ethanol_ppm") || kv.contains("methanol_ppm")) {
    GasMixture m{kv.get_double("acetone_ppm", 0.0), kv.get_double("ethanol_ppm", 0.0),
                 kv.get_double("methanol_ppm", 0.0)};
    m.validate();
    meta.mixture = m;
  }
  meta.sample_rate_hz = kv.get_double("sample_rate_hz", kDefaultSampleRateHz);
  if (!(meta.sample_rate_hz > 0.0)) throw std::invalid_argument("meta: sample_rate_hz must be > 0");
  if (kv.contains("exposure_start_ms") && kv.contains("exposure_end_ms")) {
    meta.exposure = ExposureWindow{kv.get_int("exposure_start_ms", 0), kv.get_int("exposure_end_ms", 0)};
    if (meta.exposure->end_ms <= meta.exposure->start_ms)
      throw std::invalid_argument("meta: exposure window is empty");
  }
  return meta;
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta");
  return p;
}

void save_session(const std::filesystem::path& csv_path, const Session& session) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_session_csv(csv, session);
  std::ofstream meta(meta_path_for(csv_path));
  if (!meta) throw std::runtime_error("cannot write " + meta_path_for(csv_path).string());
  write_meta(meta, session.meta);
}

Session load_session(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read " + csv_path.string());
  Session s = parse_stream(csv).session;
  if (std::ifstream meta(meta_path_for(csv_path)); meta) s.meta = read_meta(meta);
  return s;
}

std::array<std::vector<double>, kChannelCount> channel_voltages(const Session& session) {
  std::array<std::vector<double>, kChannelCount> out;
  for (auto& ch : out) ch.reserve(session.frames.size());
  for (const auto& f : session.frames)
    for (std::size_t c = 0; c < kChannelCount; ++c) out[c].push_back(adc_to_voltage(f.raw[c]));
  return out;
}

std::vector<double> timestamps_seconds(const Session& session) {
  std::vector<double> t;
  t.reserve(session.frames.size());
  for (const auto& f : session.frames) t.push_back(static_cast<double>(f.t_ms) / 1000.0);
  return t;
}

}  // namespace enose::acq
