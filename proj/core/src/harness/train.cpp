#include "ctsm/harness/train.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"
#include "ctsm/harness/metrics.hpp"
#include "ctsm/tensor/loss.hpp"

namespace ctsm {

namespace {

// First `steps` entries along axis 1 of a (B, n, ...) tensor.
Tensor first_steps(const Tensor& t, std::size_t steps) {
  const std::size_t n = t.dim(1);
  if (steps == n) return t;
  Shape s = t.shape();
  s[1] = steps;
  const std::size_t inner = t.size() / (t.dim(0) * n);
  Tensor out(s);
  for (std::size_t b = 0; b < t.dim(0); ++b) {
    std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(b * n * inner), steps * inner,
                out.data().begin() + static_cast<std::ptrdiff_t>(b * steps * inner));
  }
  return out;
}

double weight_sum(const Tensor& w) {
  double s = 0.0;
  for (double v : w.values()) s += v;
  return s;
}

}  // namespace

std::string metric_name(const TaskSpec& task) {
  switch (task.kind) {
    case TaskKind::regression: return "rmse";
    case TaskKind::binary: return "auprc";
    case TaskKind::multiclass: return "macro_auprc";
  }
  return "?";
}

bool higher_is_better(const TaskSpec& task) { return task.kind != TaskKind::regression; }

double task_metric(const TaskSpec& task, const Evaluation& e) {
  switch (task.kind) {
    case TaskKind::regression: return rmse(e.scores, e.labels, e.weights);
    case TaskKind::binary: return auprc(e.scores, e.labels, e.weights);
    case TaskKind::multiclass: return auprc_macro(e.scores, e.width, e.labels, e.weights).value;
  }
  throw ConfigError("unknown task");
}

TrainResult train(const ModelConfig& model, const Dataset& data, const TrainConfig& config,
                  std::optional<ParamSet> initial, const EpochCallback& on_epoch) {
  model.validate();
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
  if (config.batch_size == 0) throw ConfigError("batch size must be >= 1");
  TrainResult result;
  result.params = initial ? std::move(*initial) : init_model(model, config.seed);
  AdamState state = AdamState::zeros_like(result.params);

  const Evaluation start = evaluate(model, result.params, data, config.eval_batch_size, false);
  result.history.push_back({0, start.loss});
  if (on_epoch) on_epoch(result.history.back());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = make_batches(data.size(), config.batch_size, config.seed * 1'000'003ULL + epoch);
    double loss_acc = 0.0, weight_acc = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch batch = make_batch(data, batches[bi], model.task);
      const auto last = batch.last_weighted_step();
      if (!last) continue;
      const std::size_t steps = *last + 1;
      Tape tape;
      ParamBinding bind(tape, result.params);
      const Var pred = forward(model, bind, batch, {steps, nullptr});
      const Tensor weight = first_steps(batch.weight, steps);
      const Var loss = weighted_loss(pred, first_steps(batch.label, steps), weight, model.task.loss());
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw DivergenceError(fmt::format("non-finite loss at epoch {}, batch {}", epoch, bi));
      }
      tape.backward(loss);
      const auto grads = bind.gradients();
      try {
        adam_step(result.params, grads, state, config.adam);
      } catch (const DivergenceError& e) {
        throw DivergenceError(fmt::format("epoch {}, batch {}: {}", epoch, bi, e.what()));
      }
      const double w = weight_sum(weight);
      loss_acc += value * w;
      weight_acc += w;
    }
    result.history.push_back({epoch, weight_acc > 0.0 ? loss_acc / weight_acc : 0.0});
    if (on_epoch) on_epoch(result.history.back());
  }
  return result;
}

Evaluation evaluate(const ModelConfig& model, const ParamSet& params, const Dataset& data, std::size_t batch_size,
                    bool with_metric) {
  model.validate();
  Evaluation out;
  out.width = model.task.output_width();
  out.metric_name = metric_name(model.task);
  double loss_acc = 0.0, weight_acc = 0.0;
  for (const auto& idx : make_batches(data.size(), std::max<std::size_t>(batch_size, 1), std::nullopt)) {
    const Batch batch = make_batch(data, idx, model.task);
    const auto last = batch.last_weighted_step();
    if (!last) continue;
    const std::size_t steps = *last + 1;
    Tape tape;
    NoGradGuard guard(tape);
    ParamBinding bind(tape, params, false);
    const Var pred = forward(model, bind, batch, {steps, nullptr});
    const Tensor weight = first_steps(batch.weight, steps);
    const double w = weight_sum(weight);
    const double loss = weighted_loss(pred, first_steps(batch.label, steps), weight, model.task.loss()).value().item();
    if (!std::isfinite(loss)) throw DivergenceError("non-finite evaluation loss");
    loss_acc += loss * w;
    weight_acc += w;
    const Tensor& p = pred.value();
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto* s = batch.subjects[r];
      for (std::size_t i = 0; i < steps; ++i) {
        if (s->weight[i] == 0.0) continue;
        for (std::size_t k = 0; k < out.width; ++k) out.scores.push_back(p[(r * steps + i) * out.width + k]);
        out.labels.push_back(s->label[i]);
        out.weights.push_back(s->weight[i]);
      }
    }
  }
  out.loss = weight_acc > 0.0 ? loss_acc / weight_acc : 0.0;
  out.metric = with_metric ? task_metric(model.task, out) : std::nan("");
  return out;
}

}  // namespace ctsm
