#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctsm/models/model.hpp"
#include "ctsm/tensor/adam.hpp"

namespace ctsm {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::size_t eval_batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;  // weighted mean training loss; epoch 0 is before any update
};

struct TrainResult {
  ParamSet params;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam on the weighted task loss with minibatches reshuffled every epoch.
// Deterministic in config.seed. Throws DivergenceError naming the epoch and
// batch on a non-finite loss or gradient.
TrainResult train(const ModelConfig& model, const Dataset& data, const TrainConfig& config,
                  std::optional<ParamSet> initial = std::nullopt, const EpochCallback& on_epoch = {});

// Predictions gathered at weighted positions, in dataset order.
struct Evaluation {
  double loss = 0.0;
  double metric = 0.0;
  std::string metric_name;
  std::size_t width = 1;       // scores per position
  std::vector<double> scores;  // (positions, width)
  std::vector<double> labels;  // raw labels (class ids for multiclass)
  std::vector<double> weights;
};

// Throws MetricError when the metric is undefined on `data`, unless
// with_metric is false (metric is then NaN).
Evaluation evaluate(const ModelConfig& model, const ParamSet& params, const Dataset& data, std::size_t batch_size,
                    bool with_metric = true);

// rmse for regression, auprc for binary, macro auprc for multiclass.
double task_metric(const TaskSpec& task, const Evaluation& e);
std::string metric_name(const TaskSpec& task);
bool higher_is_better(const TaskSpec& task);

}  // namespace ctsm
