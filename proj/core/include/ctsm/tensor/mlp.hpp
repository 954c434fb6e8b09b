#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "ctsm/tensor/ops.hpp"
#include "ctsm/tensor/params.hpp"

namespace ctsm {

// Multilayer perceptron with ReLU hidden layers. With hidden_layers == 0 it
// is a single affine map input -> output.
struct MlpSpec {
  std::size_t input = 1;
  std::size_t hidden = 1;
  std::size_t hidden_layers = 1;
  std::size_t output = 1;
  Activation final_activation = Activation::none;

  void validate() const;
};

// Registers "<prefix>.w<k>" (in, out) and "<prefix>.b<k>" (out) for every
// layer. Weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases zero.
void init_mlp(ParamSet& params, const std::string& prefix, const MlpSpec& spec, ParamGroup group,
              std::mt19937_64& rng);

// MLP whose parameter variables have been looked up once; used inside ODE
// dynamics where the same layers are applied many times per solve.
class BoundMlp {
 public:
  BoundMlp() = default;
  BoundMlp(const MlpSpec& spec, const ParamBinding& params, const std::string& prefix);

  // x: (batch, input) -> (batch, output).
  Var operator()(const Var& x) const;
  const MlpSpec& spec() const noexcept { return spec_; }

 private:
  MlpSpec spec_;
  std::string prefix_;
  std::vector<Var> weights_;
  std::vector<Var> biases_;
};

// x: (batch, input) -> (batch, output).
Var mlp_forward(const MlpSpec& spec, const ParamBinding& params, const std::string& prefix, const Var& x);

// Glorot-uniform matrix of shape (fan_in, fan_out).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

}  // namespace ctsm
