#include "ctsm/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

void check_sizes(std::size_t a, std::size_t b, std::size_t c, const char* who) {
  if (a != b || a != c) throw DimensionError(fmt::format("{}: input lengths {}, {}, {} differ", who, a, b, c));
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> label, std::span<const double> weight) {
  check_sizes(pred.size(), label.size(), weight.size(), "rmse");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (weight[i] == 0.0) continue;
    const double d = pred[i] - label[i];
    num += weight[i] * d * d;
    den += weight[i];
  }
  if (!(den > 0.0)) throw MetricError("rmse is undefined when every weight is zero");
  return std::sqrt(num / den);
}

double auprc(std::span<const double> scores, std::span<const double> labels, std::span<const double> weight) {
  check_sizes(scores.size(), labels.size(), weight.size(), "auprc");
  std::vector<std::size_t> order;
  double positives = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw MetricError(fmt::format("auprc labels must be 0 or 1, got {}", labels[i]));
    }
    if (weight[i] == 0.0) continue;
    order.push_back(i);
    positives += weight[i] * labels[i];
  }
  if (!(positives > 0.0)) throw MetricError("auprc is undefined without a weighted positive");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double tp = 0.0, fp = 0.0, recall_prev = 0.0, ap = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      const std::size_t i = order[k];
      tp += weight[i] * labels[i];
      fp += weight[i] * (1.0 - labels[i]);
    }
    const double recall = tp / positives;
    if (tp + fp > 0.0) ap += (recall - recall_prev) * (tp / (tp + fp));
    recall_prev = recall;
  }
  return ap;
}

MacroAuprc auprc_macro(std::span<const double> scores, std::size_t k, std::span<const double> classes,
                       std::span<const double> weight) {
  if (k < 2) throw MetricError("macro auprc needs at least 2 classes");
  const std::size_t n = classes.size();
  if (scores.size() != n * k || weight.size() != n) {
    throw DimensionError(fmt::format("auprc_macro: {} scores for {} rows x {} classes, {} weights", scores.size(), n,
                                     k, weight.size()));
  }
  MacroAuprc out;
  std::vector<double> col(n), bin(n);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores[i * k + c];
      bin[i] = classes[i] == static_cast<double>(c) ? 1.0 : 0.0;
      pos += weight[i] * bin[i];
    }
    if (!(pos > 0.0)) {
      out.skipped.push_back(c);
      continue;
    }
    total += auprc(col, bin, weight);
    ++used;
  }
  if (used == 0) throw MetricError("macro auprc is undefined: no class has a weighted positive");
  out.value = total / static_cast<double>(used);
  return out;
}

}  // namespace ctsm
