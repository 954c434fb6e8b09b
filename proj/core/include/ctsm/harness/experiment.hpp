#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ctsm/harness/train.hpp"
#include "ctsm/prep/dataset.hpp"

namespace ctsm {

struct ExperimentConfig {
  ModelConfig model;  // channels/context/scheme/causal are filled from the data
  PreprocessConfig prep;
  TrainConfig train;
};

struct MetricsReport {
  std::string metric;
  std::vector<double> folds;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over folds
};

MetricsReport summarize(std::string metric, std::vector<double> folds);

// Subject-level k-fold cross-validation: each fold fits the standardizer and
// trains on the other folds, then scores the held-out subjects. Fold f uses
// model seed seed + f. `jobs` > 1 runs folds on that many threads.
MetricsReport cross_validate(std::span<const RawSubject> subjects, const ExperimentConfig& config, std::size_t folds,
                             std::uint64_t seed, std::size_t jobs = 1);

void to_json(nlohmann::json& j, const MetricsReport& r);

// Experiment settings from a JSON object; keys are those accepted by
// apply_setting.
ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base = {});

// One named setting: model, latent, hidden, embed_layers, dynamics_layers,
// epochs, batch_size, eval_batch_size, lr (number or [embedding, dynamics,
// head]), scheme, causal, standardize, impute, task, classes, solver, rtol,
// atol, dt. Throws ConfigError for anything else.
void apply_setting(ExperimentConfig& config, const std::string& key, const nlohmann::json& value);

// Inverse of experiment_from_json: every setting key with its current value.
nlohmann::json experiment_settings(const ExperimentConfig& config);

}  // namespace ctsm
