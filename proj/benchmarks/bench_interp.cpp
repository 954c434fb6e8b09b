#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ctsm/interp/control_signal.hpp"
#include "ctsm/interp/fit.hpp"
#include "ctsm/prep/dataset.hpp"
#include "ctsm/prep/raw.hpp"

namespace {

std::vector<double> series(std::size_t n, double missing, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> jitter;
  std::uniform_real_distribution<double> u;
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng) < missing ? NAN : normal(rng);
  x[0] = normal(rng);
  return x;
}

void BM_FitChannel(benchmark::State& state) {
  const auto method = static_cast<ctsm::FitMethod>(state.range(0));
  const auto x = series(static_cast<std::size_t>(state.range(1)), 0.3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ctsm::fit_channel(x, method));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.SetLabel(std::string(ctsm::to_string(method)));
}
BENCHMARK(BM_FitChannel)->ArgsProduct({{0, 1, 2, 3}, {16, 256, 4096}});

void BM_SignalEvaluate(benchmark::State& state) {
  const std::size_t n = 64, channels = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<double>> values;
  std::vector<ctsm::ChannelRole> roles(channels, ctsm::ChannelRole::feature);
  for (std::size_t c = 0; c < channels; ++c) values.push_back(series(n, 0.2, c));
  const auto signal = ctsm::build_control_signal(values, roles, ctsm::Scheme::natural);
  std::vector<double> out(channels);
  double s = 0.0;
  for (auto _ : state) {
    signal.evaluate(s, out);
    benchmark::DoNotOptimize(out.data());
    s = s > 62.0 ? 0.0 : s + 0.37;
  }
}
BENCHMARK(BM_SignalEvaluate)->Arg(7)->Arg(61);

void BM_BuildDataset(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> jitter;
  std::vector<ctsm::RawSubject> subjects(32);
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    auto& s = subjects[k];
    s.id = std::to_string(k);
    for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(1)); ++i) {
      ctsm::RawRow r;
      r.t = static_cast<double>(i) + 0.9 * jitter(rng);
      r.values = {normal(rng), normal(rng), normal(rng)};
      r.observed = {1, static_cast<std::uint8_t>(i % 2), 1};
      r.label = 1.0;
      s.rows.push_back(r);
    }
  }
  ctsm::PreprocessConfig cfg;
  cfg.scheme = static_cast<ctsm::Scheme>(state.range(0));
  cfg.standardize = false;
  for (auto _ : state) benchmark::DoNotOptimize(ctsm::build_dataset(subjects, cfg));
  state.SetLabel(std::string(ctsm::to_string(cfg.scheme)));
}
BENCHMARK(BM_BuildDataset)->ArgsProduct({{1, 5}, {8, 32}})->Unit(benchmark::kMillisecond);

}  // namespace
