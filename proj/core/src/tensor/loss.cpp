#include "ctsm/tensor/loss.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

}  // namespace

Var weighted_loss(const Var& pred, const Tensor& label, const Tensor& weight, LossKind kind) {
  const Tensor& p = pred.value();
  if (label.shape() != p.shape()) {
    throw DimensionError(fmt::format("loss label shape {} does not match prediction shape {}",
                                     to_string(label.shape()), to_string(p.shape())));
  }
  std::size_t classes = 1;
  if (kind == LossKind::ce) {
    if (p.rank() == 0) throw DimensionError("cross entropy needs a class axis");
    classes = p.shape().back();
    const Shape expected(p.shape().begin(), p.shape().end() - 1);
    if (weight.shape() != expected) {
      throw DimensionError(fmt::format("ce weight shape {} should be {}", to_string(weight.shape()),
                                       to_string(expected)));
    }
  } else if (weight.shape() != p.shape()) {
    throw DimensionError(fmt::format("loss weight shape {} does not match prediction shape {}",
                                     to_string(weight.shape()), to_string(p.shape())));
  }

  double total_weight = 0.0;
  for (double w : weight.values()) total_weight += w;

  double value = 0.0;
  const std::size_t positions = weight.size();
  if (total_weight > 0.0) {
    for (std::size_t i = 0; i < positions; ++i) {
      const double w = weight[i];
      if (w == 0.0) continue;
      switch (kind) {
        case LossKind::mse: {
          const double d = p[i] - label[i];
          value += w * d * d;
          break;
        }
        case LossKind::bce: {
          const double q = clamp_prob(p[i]);
          value -= w * (label[i] * std::log(q) + (1.0 - label[i]) * std::log(1.0 - q));
          break;
        }
        case LossKind::ce: {
          double row = 0.0;
          for (std::size_t k = 0; k < classes; ++k) {
            const double y = label[i * classes + k];
            if (y != 0.0) row -= y * std::log(clamp_prob(p[i * classes + k]));
          }
          value += w * row;
          break;
        }
      }
    }
    value /= total_weight;
  }

  return pred.tape().record(
      Tensor::scalar(value), {pred},
      [label, weight, kind, classes, total_weight](Tape& t, std::size_t self) {
        if (total_weight <= 0.0) return;
        const std::size_t ip = t.input(self, 0);
        const auto& p = t.value(ip).values();
        const double g = t.upstream(self)[0] / total_weight;
        Tensor& gp = t.grad_buffer(ip);
        for (std::size_t i = 0; i < weight.size(); ++i) {
          const double w = weight[i];
          if (w == 0.0) continue;
          switch (kind) {
            case LossKind::mse:
              gp[i] += g * w * 2.0 * (p[i] - label[i]);
              break;
            case LossKind::bce: {
              const double q = clamp_prob(p[i]);
              gp[i] += g * w * (-label[i] / q + (1.0 - label[i]) / (1.0 - q));
              break;
            }
            case LossKind::ce:
              for (std::size_t k = 0; k < classes; ++k) {
                const double y = label[i * classes + k];
                if (y != 0.0) gp[i * classes + k] -= g * w * y / clamp_prob(p[i * classes + k]);
              }
              break;
          }
        }
      });
}

}  // namespace ctsm
