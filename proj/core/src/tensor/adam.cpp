#include "ctsm/tensor/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

double AdamConfig::lr(ParamGroup group) const noexcept {
  switch (group) {
    case ParamGroup::embedding: return lr_embedding;
    case ParamGroup::dynamics: return lr_dynamics;
    case ParamGroup::head: return lr_head;
  }
  return lr_dynamics;
}

AdamState AdamState::zeros_like(const ParamSet& params) {
  AdamState s;
  for (const auto& p : params.entries()) {
    s.m.emplace_back(p.value.shape(), 0.0);
    s.v.emplace_back(p.value.shape(), 0.0);
  }
  return s;
}

void adam_step(ParamSet& params, std::span<const Tensor> grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw DimensionError(fmt::format("adam_step: {} params, {} grads, {} moment slots", params.size(),
                                     grads.size(), state.m.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].shape() != params[k].value.shape()) {
      throw DimensionError(fmt::format("gradient for '{}' has shape {}, parameter has {}", params[k].name,
                                       to_string(grads[k].shape()), to_string(params[k].value.shape())));
    }
    if (!grads[k].all_finite()) {
      throw DivergenceError(fmt::format("non-finite gradient for parameter '{}'", params[k].name));
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double lr = config.lr(params[k].group);
    Tensor& p = params[k].value;
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace ctsm
