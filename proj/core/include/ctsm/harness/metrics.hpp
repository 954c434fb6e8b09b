#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ctsm {

// sqrt(sum w (p - y)^2 / sum w). Throws MetricError when sum w == 0.
double rmse(std::span<const double> pred, std::span<const double> label, std::span<const double> weight);

// Weighted average precision: sum over descending distinct score thresholds
// of (recall increase) x precision, tied scores forming one threshold.
// Labels must be 0 or 1. Throws MetricError without a weighted positive.
double auprc(std::span<const double> scores, std::span<const double> labels, std::span<const double> weight);

struct MacroAuprc {
  double value = 0.0;
  std::vector<std::size_t> skipped;  // classes with no weighted positive
};

// One-vs-rest AUPRC averaged over classes. `scores` is row-major (n, k);
// `classes` holds integer class ids. Throws MetricError if every class is
// skipped.
MacroAuprc auprc_macro(std::span<const double> scores, std::size_t k, std::span<const double> classes,
                       std::span<const double> weight);

}  // namespace ctsm
