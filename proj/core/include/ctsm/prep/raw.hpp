#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctsm {

// One timestamped row. `observed[j] == 0` marks feature j missing; the
// corresponding entry of `values` is ignored.
struct RawRow {
  double t = 0.0;
  std::vector<double> values;
  std::vector<std::uint8_t> observed;
  std::optional<double> label;
  double weight = 1.0;

  bool has(std::size_t j) const { return observed[j] != 0; }
};

struct RawSubject {
  std::string id;
  std::vector<double> context;
  std::vector<std::uint8_t> context_observed;
  std::vector<RawRow> rows;

  std::size_t length() const noexcept { return rows.size(); }
  std::size_t feature_count() const noexcept { return rows.empty() ? 0 : rows.front().values.size(); }
};

// Throws DataError unless rows exist, times strictly increase, widths agree
// and weights are 0 or 1.
void validate_subject(const RawSubject& subject);

}  // namespace ctsm
