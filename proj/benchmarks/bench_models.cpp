#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "ctsm/models/model.hpp"
#include "ctsm/prep/batch.hpp"
#include "ctsm/prep/dataset.hpp"

namespace {

ctsm::Dataset dataset(ctsm::Scheme scheme) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> jitter;
  std::vector<ctsm::RawSubject> subjects(8);
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    auto& s = subjects[k];
    s.id = std::to_string(k);
    s.context = {normal(rng)};
    s.context_observed = {1};
    for (std::size_t i = 0; i < 8; ++i) {
      ctsm::RawRow r;
      r.t = 0.5 * (static_cast<double>(i) + 0.9 * jitter(rng));
      r.values = {normal(rng), normal(rng), normal(rng)};
      r.observed = {1, static_cast<std::uint8_t>(i % 3 != 0), 1};
      r.label = i % 2 ? 1.0 : 0.0;
      s.rows.push_back(r);
    }
  }
  ctsm::PreprocessConfig cfg;
  cfg.scheme = scheme;
  cfg.standardize = false;
  return ctsm::build_dataset(subjects, cfg);
}

// Forward (and optionally backward) pass on one batch of 32 sequences.
void BM_Model(benchmark::State& state) {
  const auto kind = static_cast<ctsm::ModelKind>(state.range(0));
  const bool backward = state.range(1) != 0;
  const ctsm::Dataset data = dataset(kind == ctsm::ModelKind::latentode ? ctsm::Scheme::hermite : ctsm::Scheme::recticubic);
  ctsm::ModelConfig config;
  config.kind = kind;
  config.latent = 16;
  config.hidden = 32;
  config = ctsm::configure_for(config, data);
  const ctsm::ParamSet params = ctsm::init_model(config, 1);
  std::vector<std::size_t> idx(std::min<std::size_t>(32, data.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const ctsm::Batch batch = ctsm::make_batch(data, idx, config.task);
  for (auto _ : state) {
    ctsm::Tape tape;
    const ctsm::ParamBinding b(tape, params, backward);
    const ctsm::Var out = ctsm::forward(config, b, batch);
    if (backward) tape.backward(ctsm::sum(out));
    benchmark::DoNotOptimize(out.value().data().data());
  }
  state.SetLabel(std::string(ctsm::to_string(kind)) + (backward ? "+backward" : ""));
}
BENCHMARK(BM_Model)->ArgsProduct({{0, 1, 2, 3, 4}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
