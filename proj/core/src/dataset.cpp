#include "enose/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace enose::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view table_name(TableId id) noexcept {
  switch (id) {
    case TableId::binary_ethanol: return "binary-ethanol";
    case TableId::binary_methanol: return "binary-methanol";
    case TableId::ternary: return "ternary";
  }
  return "unknown";
}

std::optional<TableId> parse_table_name(std::string_view name) {
  std::string norm(name);
  std::replace(norm.begin(), norm.end(), '_', '-');
  for (TableId id : {TableId::binary_ethanol, TableId::binary_methanol, TableId::ternary})
    if (norm == table_name(id)) return id;
  return std::nullopt;
}

ExperimentTable builtin_table(TableId id) {
  ExperimentTable t;
  t.name = std::string(table_name(id));
  switch (id) {
    case TableId::binary_ethanol:
      t.gases = {Gas::acetone, Gas::ethanol};
      t.rows = {{100, 0, 0}, {99, 1, 0}, {90, 10, 0}, {50, 50, 0},
                {50, 0, 0},  {49.5, 0.5, 0}, {45, 5, 0}, {25, 25, 0}};
      t.n_train = 600;
      t.n_test = 80;
      break;
    case TableId::binary_methanol:
      t.gases = {Gas::acetone, Gas::methanol};
      t.rows = {{100, 0, 0}, {99, 0, 1}, {90, 0, 10}, {50, 0, 50},
                {50, 0, 0},  {49.5, 0, 0.5}, {45, 0, 5}, {25, 0, 25}};
      t.n_train = 700;
      t.n_test = 100;
      break;
    case TableId::ternary:
      t.gases = {Gas::acetone, Gas::ethanol, Gas::methanol};
      t.rows = {{200, 0, 0}, {198, 1, 1}, {180, 10, 10}, {100, 50, 50},
                {100, 0, 0}, {98, 0.5, 0.5}, {90, 5, 5}, {50, 25, 25}};
      t.n_train = 550;
      t.n_test = 50;
      t.notes.push_back("row 98/0.5/0.5 kept verbatim although it does not follow the 100-ppm total of its neighbours");
      break;
  }
  return t;
}

std::vector<GasMixture> row_variants(const GasMixture& row, const std::vector<Gas>& gases) {
  std::vector<GasMixture> out;
  for (Gas g : gases) {
    GasMixture v = row;
    std::swap(v[Gas::acetone], v[g]);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) out.push_back(row);
  return out;
}

std::vector<std::size_t> allocate_rows(std::size_t total, std::size_t rows) {
  if (rows == 0) throw std::invalid_argument("allocate_rows: no rows");
  std::vector<std::size_t> out(rows, total / rows);
  for (std::size_t r = 0; r < total % rows; ++r) ++out[r];
  return out;
}

std::uint64_t session_seed(std::uint64_t seed, std::string_view table, std::size_t row, std::size_t rep) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(table));
  h = splitmix64(h ^ static_cast<std::uint64_t>(row));
  return splitmix64(h ^ static_cast<std::uint64_t>(rep));
}

acq::ExposureWindow exposure_window(const StandardProtocol& p) {
  return {std::llround(p.pre_air_s * 1000.0), std::llround((p.pre_air_s + p.exposure_s) * 1000.0)};
}

acq::Session simulate_labeled_session(const SensorArray& sensors, const StandardProtocol& protocol,
                                      const GasMixture& mix, std::uint64_t seed) {
  acq::Session s;
  s.frames = simulate_session(sensors, protocol.build(mix), seed);
  const bool clean = mix.acetone_ppm == 0.0 && mix.ethanol_ppm == 0.0 && mix.methanol_ppm == 0.0;
  s.meta.label = clean ? 0 : label_of(mix.dominant());
  s.meta.mixture = mix;
  s.meta.sample_rate_hz = protocol.sample_rate_hz;
  s.meta.exposure = exposure_window(protocol);
  return s;
}

std::vector<LabeledSession> generate_dataset(const ExperimentTable& table,
                                             const std::vector<std::size_t>& per_row,
                                             std::uint64_t seed, const DatasetOptions& opts) {
  if (per_row.size() != table.rows.size())
    throw std::invalid_argument("generate_dataset: per-row counts do not match the table");
  if (std::any_of(per_row.begin(), per_row.end(), [](std::size_t c) { return c == 0; }))
    throw std::invalid_argument("generate_dataset: per-row sample count must be > 0");

  std::vector<LabeledSession> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto variants = row_variants(table.rows[r], table.gases);
    for (std::size_t k = 0; k < per_row[r]; ++k) {
      const GasMixture& mix = variants[k % variants.size()];
      LabeledSession ls;
      ls.row = r;
      ls.repetition = k;
      ls.session = simulate_labeled_session(opts.sensors, opts.protocol, mix,
                                            session_seed(seed, table.name, r, k));
      out.push_back(std::move(ls));
    }
  }
  return out;
}

std::vector<LabeledSession> generate_dataset(const ExperimentTable& table, std::size_t per_row_samples,
                                             std::uint64_t seed, const DatasetOptions& opts) {
  if (per_row_samples == 0) throw std::invalid_argument("generate_dataset: per-row sample count must be > 0");
  return generate_dataset(table, std::vector<std::size_t>(table.rows.size(), per_row_samples), seed, opts);
}

}  // namespace enose::sim
