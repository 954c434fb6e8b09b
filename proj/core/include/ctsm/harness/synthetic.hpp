#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ctsm/harness/csv_io.hpp"
#include "ctsm/task.hpp"

namespace ctsm {

// Subjects follow a damped 2-D rotation z(t) whose rate depends on context
// (omega = 0.6 + 0.25 c0, gamma = 0.08 + 0.04 c1). Features are noisy linear
// readouts of z. A visit's score is 3.5 + 1.5 * mean(z_1) over [t, t + window];
// labels threshold it (binary: > 4.0) or band it (multiclass cut points 1.25,
// 2.75, 4.75), or use it directly (regression).
struct SyntheticSpec {
  std::size_t subjects = 200;
  std::size_t features = 3;
  std::size_t min_visits = 4;
  std::size_t max_visits = 10;
  double visit_spacing = 0.5;
  double jitter = 0.3;        // fraction of the spacing
  double missingness = 0.2;   // per feature cell, in [0, 1)
  double label_missing = 0.05;
  double noise = 0.1;
  double window = 0.5;
  TaskSpec task = TaskSpec::binary();
  std::uint64_t seed = 0;

  void validate() const;
};

struct SubjectTruth {
  double omega = 0.0;
  double gamma = 0.0;
  std::vector<double> z0, z1, score;  // per visit
};

struct SyntheticData {
  LoadedData data;
  std::vector<SubjectTruth> truth;
};

SyntheticData gen_synthetic(const SyntheticSpec& spec);

double synthetic_label(double score, const TaskSpec& task);
nlohmann::json truth_manifest(const SyntheticSpec& spec, const SyntheticData& data);

}  // namespace ctsm
