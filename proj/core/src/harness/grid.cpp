#include "ctsm/harness/grid.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.subjects = j.value("subjects", s.subjects);
    s.features = j.value("features", s.features);
    s.min_visits = j.value("min_visits", s.min_visits);
    s.max_visits = j.value("max_visits", s.max_visits);
    s.visit_spacing = j.value("visit_spacing", s.visit_spacing);
    s.jitter = j.value("jitter", s.jitter);
    s.missingness = j.value("missingness", s.missingness);
    s.label_missing = j.value("label_missing", s.label_missing);
    s.noise = j.value("noise", s.noise);
    s.window = j.value("window", s.window);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("synthetic data settings: {}", e.what()));
  }
  return s;
}

nlohmann::json to_json(const SyntheticSpec& s) {
  return {{"subjects", s.subjects},         {"features", s.features},       {"min_visits", s.min_visits},
          {"max_visits", s.max_visits},     {"visit_spacing", s.visit_spacing}, {"jitter", s.jitter},
          {"missingness", s.missingness},   {"label_missing", s.label_missing}, {"noise", s.noise},
          {"window", s.window},             {"seed", s.seed}};
}

nlohmann::json to_json(const DataSource& d) {
  nlohmann::json j = nlohmann::json::object();
  if (d.synthetic) j["synthetic"] = to_json(*d.synthetic);
  if (d.csv) j["csv"] = d.csv->string();
  if (d.context) j["context"] = d.context->string();
  return j;
}

DataSource data_source_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  DataSource d;
  if (j.contains("synthetic")) d.synthetic = synthetic_from_json(j.at("synthetic"));
  auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
    if (!j.contains(key)) return std::nullopt;
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  d.csv = path("csv");
  d.context = path("context");
  if (!d.synthetic && !d.csv) throw ConfigError("data source needs either 'synthetic' or 'csv'");
  if (d.synthetic && d.csv) throw ConfigError("data source cannot be both synthetic and csv");
  return d;
}

LoadedData DataSource::load(const TaskSpec& task) const {
  if (synthetic) {
    SyntheticSpec s = *synthetic;
    s.task = task;
    return gen_synthetic(s).data;
  }
  if (!csv) throw ConfigError("no data source configured");
  return load_dataset(*csv, context);
}

void GridConfig::validate() const {
  if (folds < 2) throw ConfigError("grid needs at least 2 folds");
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ConfigError(fmt::format("grid axis '{}' is empty", name));
  }
}

std::size_t GridConfig::cell_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.second.size();
  return n;
}

GridConfig grid_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  GridConfig g;
  try {
    const int version = j.value("schema_version", kReportSchemaVersion);
    if (version != kReportSchemaVersion) throw ConfigError(fmt::format("unsupported grid schema_version {}", version));
    g.name = j.value("name", std::string("grid"));
    g.folds = j.value("folds", g.folds);
    g.seed = j.value("seed", g.seed);
    g.jobs = j.value("jobs", g.jobs);
    if (j.contains("base")) g.base = experiment_from_json(j.at("base"));
    if (j.contains("task")) apply_setting(g.base, "task", j.at("task"));
    if (j.contains("classes")) apply_setting(g.base, "classes", j.at("classes"));
    if (!j.contains("data")) throw ConfigError("grid config needs a 'data' section");
    g.data = data_source_from_json(j.at("data"), base_dir);
    if (j.contains("axes")) {
      const auto& axes = j.at("axes");
      if (!axes.is_object()) throw ConfigError("'axes' must be an object of lists");
      const std::vector<std::string> order = j.value("axis_order", std::vector<std::string>{});
      std::vector<std::string> names = order;
      for (const auto& [k, v] : axes.items()) {
        if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
      }
      for (const auto& k : names) {
        if (!axes.contains(k)) throw ConfigError(fmt::format("axis_order names unknown axis '{}'", k));
        const auto& v = axes.at(k);
        if (!v.is_array()) throw ConfigError(fmt::format("axis '{}' must be a list", k));
        ExperimentConfig probe = g.base;
        for (const auto& item : v) apply_setting(probe, k, item);
        g.axes.emplace_back(k, std::vector<nlohmann::json>(v.begin(), v.end()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("grid config: {}", e.what()));
  }
  g.validate();
  return g;
}

GridReport grid_search(std::span<const RawSubject> subjects, const GridConfig& grid) {
  grid.validate();
  GridReport rep;
  rep.name = grid.name;
  rep.task = grid.base.model.task.name();
  rep.metric = metric_name(grid.base.model.task);
  rep.higher_is_better = higher_is_better(grid.base.model.task);
  rep.folds = grid.folds;
  rep.seed = grid.seed;
  for (const auto& a : grid.axes) rep.axes.push_back(a.first);

  const std::size_t cells = grid.cell_count();
  for (std::size_t c = 0; c < cells; ++c) {
    GridCell cell;
    cell.index = c;
    cell.settings = nlohmann::json::object();
    ExperimentConfig cfg = grid.base;
    std::size_t rest = c;
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      const auto& [name, values] = grid.axes[a];
      const auto& v = values[rest % values.size()];
      rest /= values.size();
      cell.settings[name] = v;
    }
    try {
      for (const auto& [name, values] : grid.axes) apply_setting(cfg, name, cell.settings.at(name));
      cell.report = cross_validate(subjects, cfg, grid.folds, grid.seed, grid.jobs);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    rep.cells.push_back(std::move(cell));
  }

  const bool desc = rep.higher_is_better;
  std::stable_sort(rep.cells.begin(), rep.cells.end(), [desc](const GridCell& a, const GridCell& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return false;
    return desc ? a.report.mean > b.report.mean : a.report.mean < b.report.mean;
  });
  return rep;
}

nlohmann::json to_json(const GridReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    nlohmann::json cell{{"rank", i + 1}, {"cell", c.index}, {"settings", c.settings},
                        {"status", c.ok ? "ok" : "failed"}};
    if (c.ok) {
      cell["folds"] = c.report.folds;
      cell["mean"] = c.report.mean;
      cell["std"] = c.report.std;
    } else {
      cell["error"] = c.error;
    }
    cells.push_back(std::move(cell));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"name", r.name},
          {"task", r.task},
          {"metric", r.metric},
          {"order", r.higher_is_better ? "descending" : "ascending"},
          {"folds", r.folds},
          {"seed", r.seed},
          {"axes", r.axes},
          {"cells", cells}};
}

std::string format_table(const GridReport& r) {
  std::vector<std::string> header{"rank"};
  header.insert(header.end(), r.axes.begin(), r.axes.end());
  header.push_back(fmt::format("{} (mean ± std, {} folds)", r.metric, r.folds));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    std::vector<std::string> row{std::to_string(i + 1)};
    for (const auto& a : r.axes) {
      const auto& v = c.settings.at(a);
      row.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    row.push_back(c.ok ? fmt::format("{:.3f} ± {:.3f}", c.report.mean, c.report.std) : "failed: " + c.error);
    rows.push_back(std::move(row));
  }
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> w(header.size());
  for (std::size_t k = 0; k < header.size(); ++k) {
    w[k] = width(header[k]);
    for (const auto& row : rows) w[k] = std::max(w[k], width(row[k]));
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out += cells[k];
      if (k + 1 < cells.size()) out += std::string(w[k] - width(cells[k]) + 2, ' ');
    }
    out += '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t k = 0; k < w.size(); ++k) total += w[k] + (k + 1 < w.size() ? 2 : 0);
  out += std::string(total, '-') + '\n';
  for (const auto& row : rows) line(row);
  return out;
}

}  // namespace ctsm
