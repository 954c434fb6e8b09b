#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctsm/prep/raw.hpp"

namespace ctsm {

struct LoadedData {
  std::vector<std::string> features;  // names without the feat_ prefix
  std::vector<std::string> context;   // names without the ctx_ prefix
  std::vector<RawSubject> subjects;   // in order of first appearance
};

// Long-format rows: subject_id, t, feat_<name>..., label, weight. Blank cells
// are missing. Context table: subject_id, ctx_<name>...; subjects without a
// context row get all-missing context. Rows are sorted by time per subject;
// a repeated (subject, t) pair is an error.
LoadedData read_dataset(std::istream& data, std::istream* context);
LoadedData load_dataset(const std::filesystem::path& data, const std::optional<std::filesystem::path>& context);

void write_dataset(std::ostream& out, const LoadedData& data);
void write_context(std::ostream& out, const LoadedData& data);
void save_dataset(const std::filesystem::path& data, const std::filesystem::path& context, const LoadedData& d);

}  // namespace ctsm
