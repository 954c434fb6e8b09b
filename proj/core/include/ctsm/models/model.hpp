#pragma once

#include <cstdint>
#include <vector>

#include "ctsm/models/config.hpp"
#include "ctsm/ode/solver.hpp"
#include "ctsm/prep/batch.hpp"
#include "ctsm/tensor/mlp.hpp"
#include "ctsm/tensor/params.hpp"

namespace ctsm {

// Glorot-uniform weights, zero biases, deterministic in `seed`.
//
//   ncde       embed.*  (embedding)  field.* (dynamics)  head.*
//   odernn     update.* (embedding)  field.* (dynamics)  head.*
//   latentode  encoder.update.* (embedding)  encoder.field.*, field.* (dynamics)  head.*
//   gruode     embed.*  (embedding)  gru.W{r,z,g}{x,h,c}, gru.b{r,z,g} (dynamics)  head.*
//   rnn        cell.*   (dynamics)   head.*
ParamSet init_model(const ModelConfig& config, std::uint64_t seed);

// Layer shapes used by init_model and the forward pass.
MlpSpec embed_spec(const ModelConfig& c);
MlpSpec field_spec(const ModelConfig& c);
MlpSpec update_spec(const ModelConfig& c);
MlpSpec rnn_cell_spec(const ModelConfig& c);

struct ForwardOptions {
  std::size_t steps = 0;  // predict steps 0..steps-1; 0 means every step
  std::vector<StepRecord>* trace = nullptr;
};

// Predictions of shape (B, steps, output_width).
Var forward(const ModelConfig& config, const ParamBinding& params, const Batch& batch,
            const ForwardOptions& options = {});

// Single linear layer plus the task activation: (B, latent) -> (B, width).
Var prediction_head(const ParamBinding& params, const Var& h, const TaskSpec& task);

// Neural CDE vector field f(h, psi(s)) dX/ds on interval `piece`.
Var ncde_vector_field(const ModelConfig& config, const ParamBinding& params, const Batch& batch,
                      std::size_t piece, double s, const Var& h);

// Hidden state after the backward ODE-RNN encoder of the Latent ODE.
Var latent_encode(const ModelConfig& config, const ParamBinding& params, const Batch& batch);

}  // namespace ctsm
