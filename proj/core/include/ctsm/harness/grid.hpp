#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctsm/harness/experiment.hpp"
#include "ctsm/harness/synthetic.hpp"

namespace ctsm {

inline constexpr int kReportSchemaVersion = 1;

// Where a grid or CLI run takes its subjects from.
struct DataSource {
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> context;

  LoadedData load(const TaskSpec& task) const;
};

DataSource data_source_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
SyntheticSpec synthetic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& s);
nlohmann::json to_json(const DataSource& d);

struct GridConfig {
  std::string name;
  ExperimentConfig base;
  // Axis name -> candidate values, in declaration order. Axis names are the
  // keys accepted by apply_setting.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  DataSource data;

  void validate() const;
  std::size_t cell_count() const;
};

GridConfig grid_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct GridCell {
  std::size_t index = 0;  // position in the cartesian product
  nlohmann::json settings;
  bool ok = false;
  std::string error;
  MetricsReport report;
};

struct GridReport {
  std::string name;
  std::string task;
  std::string metric;
  bool higher_is_better = true;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> axes;
  std::vector<GridCell> cells;  // ranked: best first, failures last
};

// Cross-validates every cell; a failing cell is recorded, not rethrown.
GridReport grid_search(std::span<const RawSubject> subjects, const GridConfig& grid);

nlohmann::json to_json(const GridReport& r);
// Plain-text table with one row per cell and a "mean ± std" column.
std::string format_table(const GridReport& r);

}  // namespace ctsm
