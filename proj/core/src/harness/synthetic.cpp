#include "ctsm/harness/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

constexpr double kReadout[4][2] = {{1.0, 0.3}, {-0.4, 1.0}, {0.7, -0.7}, {0.2, 0.9}};
constexpr std::size_t kWindowSamples = 16;

struct Rotation {
  double r0, theta0, omega, gamma;

  std::array<double, 2> at(double t) const {
    const double r = r0 * std::exp(-gamma * t);
    return {r * std::cos(omega * t + theta0), r * std::sin(omega * t + theta0)};
  }

  // Mean of z_1 over [t, t + w] by composite Simpson.
  double window_mean(double t, double w) const {
    const std::size_t n = kWindowSamples;
    const double h = w / static_cast<double>(n);
    double acc = at(t)[1] + at(t + w)[1];
    for (std::size_t k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * at(t + h * static_cast<double>(k))[1];
    return acc * h / 3.0 / w;
  }
};

}  // namespace

void SyntheticSpec::validate() const {
  if (subjects < 1) throw ConfigError("synthetic data needs at least one subject");
  if (features < 1) throw ConfigError("synthetic data needs at least one feature");
  if (min_visits < 1 || max_visits < min_visits) throw ConfigError("need 1 <= min_visits <= max_visits");
  if (!(missingness >= 0.0 && missingness < 1.0)) throw ConfigError("missingness must be in [0, 1)");
  if (!(label_missing >= 0.0 && label_missing < 1.0)) throw ConfigError("label_missing must be in [0, 1)");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw ConfigError("jitter must be in [0, 0.5)");
  if (!(visit_spacing > 0.0) || !(window > 0.0)) throw ConfigError("spacing and window must be positive");
  task.validate();
}

double synthetic_label(double score, const TaskSpec& task) {
  switch (task.kind) {
    case TaskKind::regression: return score;
    case TaskKind::binary: return score > 4.0 ? 1.0 : 0.0;
    case TaskKind::multiclass: {
      constexpr double cuts[] = {1.25, 2.75, 4.75};
      double cls = 0.0;
      for (double c : cuts) cls += score > c ? 1.0 : 0.0;
      return std::min(cls, static_cast<double>(task.classes - 1));
    }
  }
  return score;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> visits(spec.min_visits, spec.max_visits);

  SyntheticData out;
  for (std::size_t j = 0; j < spec.features; ++j) out.data.features.push_back(fmt::format("x{}", j));
  out.data.context = {"c0", "c1"};

  for (std::size_t s = 0; s < spec.subjects; ++s) {
    const double c0 = normal(rng);
    const double c1 = unit(rng) < 0.5 ? 1.0 : 0.0;
    Rotation rot{1.0 + unit(rng), 2.0 * std::numbers::pi * unit(rng), std::max(0.1, 0.6 + 0.25 * c0),
                 0.08 + 0.04 * c1};
    RawSubject subj;
    subj.id = fmt::format("s{:04d}", s);
    subj.context = {c0, c1};
    subj.context_observed = {1, 1};
    SubjectTruth truth{rot.omega, rot.gamma, {}, {}, {}};

    const std::size_t n = visits(rng);
    bool any_observed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = spec.visit_spacing * (static_cast<double>(i) + spec.jitter * (2.0 * unit(rng) - 1.0)) +
                       spec.visit_spacing * spec.jitter;
      const auto z = rot.at(t);
      RawRow row;
      row.t = t;
      for (std::size_t j = 0; j < spec.features; ++j) {
        const auto& a = kReadout[j % 4];
        const double v = a[0] * z[0] + a[1] * z[1] + 0.1 * static_cast<double>(j) + spec.noise * normal(rng);
        const bool observed = unit(rng) >= spec.missingness;
        row.values.push_back(observed ? v : 0.0);
        row.observed.push_back(observed ? 1 : 0);
        any_observed = any_observed || observed;
      }
      const double score = 3.5 + 1.5 * rot.window_mean(t, spec.window);
      if (unit(rng) >= spec.label_missing) row.label = synthetic_label(score, spec.task);
      row.weight = row.label ? 1.0 : 0.0;
      truth.z0.push_back(z[0]);
      truth.z1.push_back(z[1]);
      truth.score.push_back(score);
      subj.rows.push_back(std::move(row));
    }
    if (!any_observed) {
      const auto z = rot.at(subj.rows.front().t);
      subj.rows.front().values[0] = kReadout[0][0] * z[0] + kReadout[0][1] * z[1];
      subj.rows.front().observed[0] = 1;
    }
    out.data.subjects.push_back(std::move(subj));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

nlohmann::json truth_manifest(const SyntheticSpec& spec, const SyntheticData& data) {
  nlohmann::json subjects = nlohmann::json::array();
  for (std::size_t s = 0; s < data.truth.size(); ++s) {
    const auto& t = data.truth[s];
    subjects.push_back({{"id", data.data.subjects[s].id},
                        {"omega", t.omega},
                        {"gamma", t.gamma},
                        {"z0", t.z0},
                        {"z1", t.z1},
                        {"score", t.score}});
  }
  return {{"schema_version", 1},
          {"generator",
           {{"subjects", spec.subjects},
            {"features", spec.features},
            {"min_visits", spec.min_visits},
            {"max_visits", spec.max_visits},
            {"missingness", spec.missingness},
            {"label_missing", spec.label_missing},
            {"noise", spec.noise},
            {"window", spec.window},
            {"task", spec.task.name()},
            {"seed", spec.seed}}},
          {"subjects", subjects}};
}

}  // namespace ctsm
