#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ctsm/prep/dataset.hpp"
#include "ctsm/task.hpp"
#include "ctsm/tensor/tensor.hpp"

namespace ctsm {

// Stacked view of several processed subjects sharing one padded length.
struct Batch {
  std::vector<const ProcessedSubject*> subjects;
  std::size_t length = 0;
  Tensor context;  // (B, context)
  Tensor label;    // (B, n, 1), or one-hot (B, n, K) for multiclass
  Tensor weight;   // (B, n, 1), or (B, n) for multiclass
  Tensor mask;     // (B, n)

  std::size_t size() const noexcept { return subjects.size(); }
  // Largest step index carrying nonzero weight, or nullopt if none.
  std::optional<std::size_t> last_weighted_step() const;
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices, const TaskSpec& task);

// Index lists of at most `batch_size`; shuffled when a seed is given, in
// dataset order otherwise. The final partial batch is kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::optional<std::uint64_t> seed);

}  // namespace ctsm
