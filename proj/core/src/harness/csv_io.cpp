#include "ctsm/harness/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(std::move(cell));
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

std::optional<double> parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  if (cell.empty() || cell == "nan" || cell == "NaN") return std::nullopt;
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError(fmt::format("line {}: column '{}' has non-numeric value '{}'", line, column, cell));
  }
  return v;
}

std::string fmt_cell(bool present, double v) { return present ? fmt::format("{:.17g}", v) : std::string(); }

}  // namespace

LoadedData read_dataset(std::istream& data, std::istream* context) {
  LoadedData out;
  std::string line;
  if (!std::getline(data, line)) throw DataError("dataset is empty (no header)");
  const auto header = split_line(line);
  if (header.size() < 4 || header[0] != "subject_id" || header[1] != "t") {
    throw DataError("line 1: header must start with subject_id,t");
  }
  std::size_t label_col = 0, weight_col = 0;
  std::vector<std::size_t> feat_cols;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h.rfind("feat_", 0) == 0) {
      feat_cols.push_back(c);
      out.features.push_back(h.substr(5));
    } else if (h == "label") {
      label_col = c;
    } else if (h == "weight") {
      weight_col = c;
    } else {
      throw DataError(fmt::format("line 1: unknown column '{}'", h));
    }
  }
  if (label_col == 0 || weight_col == 0) throw DataError("line 1: header needs label and weight columns");
  if (feat_cols.empty()) throw DataError("line 1: no feat_ columns");

  std::unordered_map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(data, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError(fmt::format("line {}: expected {} cells, found {}", lineno, header.size(), cells.size()));
    }
    if (cells[0].empty()) throw DataError(fmt::format("line {}: empty subject_id", lineno));
    const auto t = parse_cell(cells[1], lineno, "t");
    if (!t) throw DataError(fmt::format("line {}: missing time", lineno));
    RawRow row;
    row.t = *t;
    for (std::size_t k = 0; k < feat_cols.size(); ++k) {
      const auto v = parse_cell(cells[feat_cols[k]], lineno, header[feat_cols[k]]);
      row.values.push_back(v.value_or(0.0));
      row.observed.push_back(v ? 1 : 0);
    }
    row.label = parse_cell(cells[label_col], lineno, "label");
    const auto w = parse_cell(cells[weight_col], lineno, "weight");
    row.weight = w.value_or(0.0);
    if (row.weight != 0.0 && row.weight != 1.0) throw DataError(fmt::format("line {}: weight must be 0 or 1", lineno));
    auto [it, fresh] = index.try_emplace(cells[0], out.subjects.size());
    if (fresh) {
      out.subjects.push_back({});
      out.subjects.back().id = cells[0];
    }
    out.subjects[it->second].rows.push_back(std::move(row));
  }
  if (out.subjects.empty()) throw DataError("dataset has no rows");
  for (auto& s : out.subjects) {
    std::sort(s.rows.begin(), s.rows.end(), [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
      if (s.rows[i].t == s.rows[i - 1].t) {
        throw DataError(fmt::format("subject '{}' has duplicate rows at t = {}", s.id, s.rows[i].t));
      }
    }
  }

  std::size_t ctx_width = 0;
  if (context) {
    if (!std::getline(*context, line)) throw DataError("context table is empty (no header)");
    const auto ch = split_line(line);
    if (ch.empty() || ch[0] != "subject_id") throw DataError("context line 1: header must start with subject_id");
    for (std::size_t c = 1; c < ch.size(); ++c) {
      if (ch[c].rfind("ctx_", 0) != 0) throw DataError(fmt::format("context line 1: unknown column '{}'", ch[c]));
      out.context.push_back(ch[c].substr(4));
    }
    ctx_width = out.context.size();
    for (auto& s : out.subjects) {
      s.context.assign(ctx_width, 0.0);
      s.context_observed.assign(ctx_width, 0);
    }
    lineno = 1;
    while (std::getline(*context, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      const auto cells = split_line(line);
      if (cells.size() != ch.size()) {
        throw DataError(fmt::format("context line {}: expected {} cells, found {}", lineno, ch.size(), cells.size()));
      }
      const auto it = index.find(cells[0]);
      if (it == index.end()) continue;
      auto& s = out.subjects[it->second];
      for (std::size_t k = 0; k < ctx_width; ++k) {
        const auto v = parse_cell(cells[k + 1], lineno, ch[k + 1]);
        s.context[k] = v.value_or(0.0);
        s.context_observed[k] = v ? 1 : 0;
      }
    }
  }
  for (const auto& s : out.subjects) validate_subject(s);
  return out;
}

LoadedData load_dataset(const std::filesystem::path& data, const std::optional<std::filesystem::path>& context) {
  std::ifstream d(data);
  if (!d) throw DataError(fmt::format("cannot open dataset '{}'", data.string()));
  if (!context) return read_dataset(d, nullptr);
  std::ifstream c(*context);
  if (!c) throw DataError(fmt::format("cannot open context table '{}'", context->string()));
  return read_dataset(d, &c);
}

void write_dataset(std::ostream& out, const LoadedData& data) {
  out << "subject_id,t";
  for (const auto& f : data.features) out << ",feat_" << f;
  out << ",label,weight\n";
  for (const auto& s : data.subjects) {
    for (const auto& r : s.rows) {
      out << s.id << ',' << fmt::format("{:.17g}", r.t);
      for (std::size_t j = 0; j < r.values.size(); ++j) out << ',' << fmt_cell(r.has(j), r.values[j]);
      out << ',' << fmt_cell(r.label.has_value(), r.label.value_or(0.0)) << ',' << fmt::format("{:g}", r.weight) << '\n';
    }
  }
}

void write_context(std::ostream& out, const LoadedData& data) {
  out << "subject_id";
  for (const auto& c : data.context) out << ",ctx_" << c;
  out << '\n';
  for (const auto& s : data.subjects) {
    out << s.id;
    for (std::size_t j = 0; j < s.context.size(); ++j) out << ',' << fmt_cell(s.context_observed[j] != 0, s.context[j]);
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& data, const std::filesystem::path& context, const LoadedData& d) {
  std::ofstream a(data);
  if (!a) throw DataError(fmt::format("cannot open '{}' for writing", data.string()));
  write_dataset(a, d);
  std::ofstream b(context);
  if (!b) throw DataError(fmt::format("cannot open '{}' for writing", context.string()));
  write_context(b, d);
}

}  // namespace ctsm
