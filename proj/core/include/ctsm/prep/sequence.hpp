#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctsm/prep/raw.hpp"

namespace ctsm {

// Per-step arrays of one (possibly transformed) subject. Feature-indexed
// arrays are row-major: element (i, j) lives at i * features + j.
struct Sequence {
  std::size_t features = 0;
  std::vector<double> x;               // feature values; ignored where !observed
  std::vector<std::uint8_t> observed;  // feature observation flags
  std::vector<double> counts;          // cumulative observation counts o
  std::vector<double> t;
  std::vector<double> label;
  std::vector<double> weight;
  std::vector<std::uint8_t> mask;  // update mask u_i

  std::size_t length() const noexcept { return t.size(); }
  bool has(std::size_t i, std::size_t j) const { return observed[i * features + j] != 0; }
  double value(std::size_t i, std::size_t j) const { return x[i * features + j]; }

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

// Converts rows to a Sequence with observation counts. A missing label forces
// weight 0 and stores label 0. Every step gets update mask 1.
Sequence count_observations(const RawSubject& subject);

// Pads to `target` steps: features missing, counts and time held, label and
// weight 0, update mask 0. Throws DataError if target < length.
Sequence pad_sequence(const Sequence& seq, std::size_t target);

// Copy k keeps steps 0..k, then repeats step k up to the original length.
// Only step k of copy k keeps its weight.
std::vector<Sequence> copy_expand(const Sequence& seq);

// Length n -> 2n - 1. Step 2k holds (x~_k, o_k, t_k, y_k, w_k); step 2k + 1
// holds (x~_k, o_k, t_{k+1}, y_k, 0), with x~ the fill-forward of x. Features
// missing before their first observation are filled with 0.
Sequence recti_expand(const Sequence& seq);

std::vector<std::uint8_t> build_update_mask(const Sequence& seq);

// Channel layout fed to interpolation: features, counts, then time.
// Missing feature values are NaN unless `zero_fill` is set.
std::vector<std::vector<double>> sequence_channels(const Sequence& seq, bool zero_fill);

// Zero-imputed (x, o, t) rows, length x (2 * features + 1), for discrete models.
std::vector<double> sequence_rows(const Sequence& seq);

}  // namespace ctsm
