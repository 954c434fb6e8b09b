#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsm/models/model.hpp"
#include "ctsm/prep/dataset.hpp"

// Shared scaffolding for model-level checks in the unit and acceptance
// suites.
namespace ctsm::testing {

// Random raw subjects (context imputed, not standardized) with lengths in
// [min_len, max_len].
std::vector<RawSubject> toy_subjects(std::uint64_t seed, std::size_t count, std::size_t min_len, std::size_t max_len,
                                     std::size_t features, std::size_t context, double missing = 0.3);

Dataset toy_dataset(std::span<const RawSubject> subjects, Scheme scheme, std::optional<CausalMode> causal,
                    std::size_t target_length = 0);

ModelConfig small_model(ModelKind kind, const Dataset& data, std::size_t latent = 4, std::size_t hidden = 6,
                        TaskSpec task = TaskSpec::binary());

// init_model with every zero entry (the biases) replaced by U(-0.2, 0.2), so
// small ReLU layers are unlikely to be entirely inactive.
ParamSet init_with_biases(const ModelConfig& config, std::uint64_t seed);

struct GradientReport {
  std::string worst_param;
  double worst_error = 0.0;      // max over parameter tensors
  std::vector<double> by_group;  // max per ParamGroup (embedding, dynamics, head); -1 if absent
};

// Reverse-mode gradient of sum(W * forward) against central differences for
// every parameter tensor. The error of a tensor is
// ||g - fd|| / max(||g||, ||fd||, floor).
GradientReport check_model_gradients(const ModelConfig& config, const Dataset& data, std::uint64_t seed,
                                     double step = 1e-6, double floor = 1e-6);

// Model predictions (steps, width) for a batch of the given subjects.
Tensor predict(const ModelConfig& config, const ParamSet& params, const Dataset& data,
               const std::vector<std::size_t>& indices, const TaskSpec& task);

}  // namespace ctsm::testing
