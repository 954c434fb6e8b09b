#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctsm/interp/control_signal.hpp"
#include "ctsm/prep/raw.hpp"
#include "ctsm/prep/sequence.hpp"
#include "ctsm/prep/standardizer.hpp"

namespace ctsm {

enum class CausalMode { copy, recti };
enum class ImputeMode { interpolate, zero };

std::string_view to_string(CausalMode m);
std::string_view to_string(ImputeMode m);
CausalMode causal_from_string(std::string_view name);
ImputeMode impute_from_string(std::string_view name);

struct PreprocessConfig {
  Scheme scheme = Scheme::hermite;
  // Unset: recti for the recti schemes, copy otherwise.
  std::optional<CausalMode> causal;
  bool standardize = true;
  ImputeMode impute = ImputeMode::interpolate;
  std::size_t max_rows = 1'000'000;
};

// Scheme and causal mode after resolving the recti aliases: linear/hermite
// with recti become rectilinear/recticubic. Throws ConfigError on conflicts.
struct ResolvedScheme {
  Scheme scheme;
  CausalMode causal;
};
ResolvedScheme resolve_scheme(Scheme scheme, std::optional<CausalMode> causal);

struct ProcessedSubject {
  std::string id;
  std::size_t source = 0;  // index of the raw subject it came from
  std::size_t copy = 0;    // copy index under copy-expansion, else 0
  ControlSignal signal;
  std::vector<double> context;
  std::vector<double> label;
  std::vector<double> weight;
  std::vector<std::uint8_t> mask;
  std::vector<double> rows;  // zero-imputed (x, o, t) per step

  std::size_t length() const noexcept { return label.size(); }
};

struct Dataset {
  Scheme scheme = Scheme::hermite;
  CausalMode causal = CausalMode::copy;
  std::size_t features = 0;
  std::size_t context = 0;
  std::size_t length = 0;
  std::vector<ProcessedSubject> subjects;

  std::size_t size() const noexcept { return subjects.size(); }
  std::size_t channels() const noexcept { return 2 * features + 1; }
  std::size_t row_width() const noexcept { return 2 * features + 1; }
  std::vector<ControlSignal> signals() const;
};

// Counts, applies the causal transform, pads every result to a shared length
// (`target_length`, or the longest if 0) and fits the control signals.
// Subjects must already be standardized and context-imputed.
Dataset build_dataset(std::span<const RawSubject> subjects, const PreprocessConfig& config,
                      std::size_t target_length = 0);

// Seeded subject-level shuffle into train and test index sets.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed);

// Seeded subject-level partition into k folds of near-equal size.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

std::vector<RawSubject> select(std::span<const RawSubject> subjects, std::span<const std::size_t> idx);

struct PreparedData {
  Standardizer standardizer;
  Dataset train;
  Dataset test;
};

// Fits the standardizer on `train` only, then transforms and builds both
// sets. Test data is padded to its own longest subject.
PreparedData prepare(std::span<const RawSubject> train, std::span<const RawSubject> test,
                     const PreprocessConfig& config);

// Full pipeline with a seeded train/test split.
struct AssembledData {
  Split split;
  PreparedData data;
};
AssembledData assemble_dataset(std::span<const RawSubject> subjects, const PreprocessConfig& config,
                               double test_fraction, std::uint64_t seed);

}  // namespace ctsm
