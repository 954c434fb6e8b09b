#include "ctsm/tensor/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

void MlpSpec::validate() const {
  if (input < 1 || output < 1 || (hidden_layers > 0 && hidden < 1)) {
    throw ConfigError(fmt::format("MLP widths must be >= 1 (input {}, hidden {}, output {})", input,
                                  hidden, output));
  }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w(Shape{fan_in, fan_out});
  for (double& v : w.data()) v = dist(rng);
  return w;
}

void init_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, ParamGroup group,
              std::mt19937_64& rng) {
  spec.validate();
  std::size_t fan_in = spec.input;
  for (std::size_t k = 0; k <= spec.hidden_layers; ++k) {
    const std::size_t fan_out = k == spec.hidden_layers ? spec.output : spec.hidden;
    params.add(fmt::format("{}.w{}", prefix, k), group, glorot_uniform(fan_in, fan_out, rng));
    params.add(fmt::format("{}.b{}", prefix, k), group, Tensor(Shape{fan_out}, 0.0));
    fan_in = fan_out;
  }
}

BoundMlp::BoundMlp(const MlpSpec& spec, const ParamBinding& params, const std::string& prefix)
    : spec_(spec), prefix_(prefix) {
  for (std::size_t k = 0; k <= spec.hidden_layers; ++k) {
    weights_.push_back(params[fmt::format("{}.w{}", prefix, k)]);
    biases_.push_back(params[fmt::format("{}.b{}", prefix, k)]);
  }
}

Var BoundMlp::operator()(const Var& x) const {
  const Shape& s = x.shape();
  if (s.size() != 2 || s[1] != spec_.input) {
    throw DimensionError(fmt::format("MLP '{}' expects input (batch, {}), got {}", prefix_, spec_.input,
                                     to_string(s)));
  }
  Var h = x;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    h = add(matmul(h, weights_[k]), biases_[k]);
    h = k + 1 == weights_.size() ? activate(h, spec_.final_activation) : relu(h);
  }
  return h;
}

Var mlp_forward(const MlpSpec& spec, const ParamBinding& params, const std::string& prefix, const Var& x) {
  return BoundMlp(spec, params, prefix)(x);
}

}  // namespace ctsm
