#pragma once

#include <cstddef>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "ctsm/interp/cubic.hpp"
#include "ctsm/ode/solver.hpp"
#include "ctsm/prep/dataset.hpp"
#include "ctsm/task.hpp"

namespace ctsm {

enum class ModelKind { ncde, odernn, latentode, gruode, rnn };

std::string_view to_string(ModelKind k);
ModelKind model_from_string(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::ncde;
  std::size_t latent = 16;
  std::size_t hidden = 32;
  std::size_t embed_layers = 1;
  std::size_t dynamics_layers = 2;
  std::size_t channels = 0;  // control-signal channels: 2 * features + 1
  std::size_t context = 0;
  TaskSpec task;
  SolverConfig solver;
  Scheme scheme = Scheme::hermite;
  CausalMode causal = CausalMode::copy;

  // Throws ConfigError on bad widths or a Latent ODE on recti signals.
  void validate() const;
  bool continuous() const noexcept { return kind != ModelKind::rnn; }
};

// Fills channels/context/scheme/causal from a prepared dataset.
ModelConfig configure_for(ModelConfig config, const Dataset& data);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace ctsm
