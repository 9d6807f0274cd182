#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "enose/acquisition.hpp"
#include "enose/sensor_sim.hpp"

namespace enose::sim {

enum class TableId { binary_ethanol, binary_methanol, ternary };

std::string_view table_name(TableId id) noexcept;
/// Accepts `binary-ethanol` / `binary_ethanol` style names.
std::optional<TableId> parse_table_name(std::string_view name);

/// One mixture-ratio study: its rows and the published train/test sizes.
struct ExperimentTable {
  std::string name;
  std::vector<GasMixture> rows;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  /// Gases that take part in the study, in class-code order.
  std::vector<Gas> gases;
  /// Free-text remarks carried into report metadata.
  std::vector<std::string> notes;

  std::size_t total() const noexcept { return n_train + n_test; }
};

/// Verbatim mixture tables: acetone/ethanol (600/80), acetone/methanol
/// (700/100) and acetone/ethanol/methanol (550/50).
ExperimentTable builtin_table(TableId id);

/// Variants of one row in which each participating gas in turn takes the
/// row's leading concentration. Rows whose permutations coincide (for example
/// 50/50) yield a single variant. Label of a variant = its dominant gas.
std::vector<GasMixture> row_variants(const GasMixture& row, const std::vector<Gas>& gases);

/// Sessions per row so that the sum equals `total`; the remainder goes to the
/// first rows, one each.
std::vector<std::size_t> allocate_rows(std::size_t total, std::size_t rows);

/// Exposure window implied by the standard protocol timings.
acq::ExposureWindow exposure_window(const StandardProtocol& protocol);

/// One simulated session with metadata filled in. Clean air is labelled 0,
/// anything else by its dominant gas.
acq::Session simulate_labeled_session(const SensorArray& sensors, const StandardProtocol& protocol,
                                      const GasMixture& mix, std::uint64_t seed);

struct LabeledSession {
  acq::Session session;
  std::size_t row = 0;
  std::size_t repetition = 0;
};

struct DatasetOptions {
  SensorArray sensors = default_sensor_array();
  StandardProtocol protocol{};
};

/// Stable per-session seed from (seed, table, row, repetition).
std::uint64_t session_seed(std::uint64_t seed, std::string_view table, std::size_t row, std::size_t rep);

/// `per_row[r]` sessions for row r; repetition k of a row uses variant
/// k mod variant_count. Throws std::invalid_argument when a count is zero.
std::vector<LabeledSession> generate_dataset(const ExperimentTable& table,
                                             const std::vector<std::size_t>& per_row,
                                             std::uint64_t seed, const DatasetOptions& opts = {});

/// Same count for every row.
std::vector<LabeledSession> generate_dataset(const ExperimentTable& table, std::size_t per_row_samples,
                                             std::uint64_t seed, const DatasetOptions& opts = {});

}  // namespace enose::sim
