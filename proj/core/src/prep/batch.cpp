#include "ctsm/prep/batch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::optional<std::size_t> Batch::last_weighted_step() const {
  std::optional<std::size_t> last;
  const std::size_t b = size();
  const std::size_t per = weight.size() / std::max<std::size_t>(b * length, 1);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t i = length; i-- > 0;) {
      bool any = false;
      for (std::size_t k = 0; k < per; ++k) any = any || weight[(r * length + i) * per + k] != 0.0;
      if (any) {
        if (!last || i > *last) last = i;
        break;
      }
    }
  }
  return last;
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices, const TaskSpec& task) {
  if (indices.empty()) throw UsageError("cannot build an empty batch");
  Batch b;
  const std::size_t bs = indices.size();
  const std::size_t n = data.length;
  const std::size_t k = task.output_width();
  b.length = n;
  b.context = Tensor(Shape{bs, data.context});
  b.mask = Tensor(Shape{bs, n});
  const bool multi = task.kind == TaskKind::multiclass;
  b.label = Tensor(Shape{bs, n, k});
  b.weight = multi ? Tensor(Shape{bs, n}) : Tensor(Shape{bs, n, 1});
  for (std::size_t r = 0; r < bs; ++r) {
    const auto& s = data.subjects.at(indices[r]);
    b.subjects.push_back(&s);
    if (s.length() != n) throw DimensionError(fmt::format("subject '{}' has length {}, batch expects {}", s.id, s.length(), n));
    std::copy(s.context.begin(), s.context.end(), b.context.data().begin() + static_cast<std::ptrdiff_t>(r * data.context));
    for (std::size_t i = 0; i < n; ++i) {
      b.mask[r * n + i] = s.mask[i];
      const double w = s.weight[i];
      b.weight[r * n + i] = w;
      const double y = s.label[i];
      if (!multi) {
        if (task.kind == TaskKind::binary && w != 0.0 && y != 0.0 && y != 1.0) {
          throw DataError(fmt::format("subject '{}' step {}: binary label must be 0 or 1, got {}", s.id, i, y));
        }
        b.label[r * n + i] = y;
        continue;
      }
      if (w == 0.0) continue;
      const double cls = std::round(y);
      if (cls != y || cls < 0.0 || cls >= static_cast<double>(k)) {
        throw DataError(fmt::format("subject '{}' step {}: class label {} outside 0..{}", s.id, i, y, k - 1));
      }
      b.label[(r * n + i) * k + static_cast<std::size_t>(cls)] = 1.0;
    }
  }
  return b;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::optional<std::uint64_t> seed) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::shuffle(idx.begin(), idx.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size) {
    out.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(i),
                     idx.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  }
  return out;
}

}  // namespace ctsm
