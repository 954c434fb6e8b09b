#pragma once

#include "ctsm/tensor/ops.hpp"

namespace ctsm {

enum class LossKind { mse, bce, ce };

inline constexpr double kProbabilityFloor = 1e-12;

// Weighted loss, normalised by the sum of weights.
//
//   mse: pred, label, weight share one shape.
//   bce: as mse; pred holds probabilities in (0,1).
//   ce:  pred and label are (..., K) (softmax rows / one-hot rows); weight
//        has pred's shape without the last axis.
//
// Weight-0 positions contribute exactly zero value and zero gradient. When
// every weight is zero the loss is 0 with a zero gradient. Probabilities are
// clamped to [1e-12, 1 - 1e-12] before taking logs.
Var weighted_loss(const Var& pred, const Tensor& label, const Tensor& weight, LossKind kind);

}  // namespace ctsm
