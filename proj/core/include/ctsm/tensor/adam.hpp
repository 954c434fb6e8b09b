#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctsm/tensor/params.hpp"

namespace ctsm {

struct AdamConfig {
  double lr_embedding = 1e-3;
  double lr_dynamics = 1e-3;
  double lr_head = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  double lr(ParamGroup group) const noexcept;
  void set_all(double lr) noexcept { lr_embedding = lr_dynamics = lr_head = lr; }
};

// First/second moments per parameter plus the shared step counter.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const ParamSet& params);
};

// One bias-corrected Adam update; grads aligned with ParamSet order.
// Throws DivergenceError naming the parameter if a gradient is non-finite.
void adam_step(ParamSet& params, std::span<const Tensor> grads, AdamState& state, const AdamConfig& config);

}  // namespace ctsm
