#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ctsm/ode/solver.hpp"
#include "ctsm/tensor/mlp.hpp"

namespace {

struct Field {
  ctsm::ParamSet params;
  ctsm::MlpSpec spec;

  Field(std::size_t dim, std::size_t hidden) {
    spec = {dim, hidden, 2, dim, ctsm::Activation::tanh};
    std::mt19937_64 rng(7);
    ctsm::init_mlp(params, "f", spec, ctsm::ParamGroup::dynamics, rng);
  }
};

ctsm::Tensor start(std::size_t batch, std::size_t dim) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<double> v(batch * dim);
  for (auto& x : v) x = normal(rng);
  return ctsm::Tensor(ctsm::Shape{batch, dim}, v);
}

void BM_Solve(benchmark::State& state) {
  const auto method = static_cast<ctsm::SolverMethod>(state.range(0));
  const std::size_t batch = static_cast<std::size_t>(state.range(1)), dim = 16;
  const Field field(dim, 32);
  const ctsm::Tensor h0 = start(batch, dim);
  ctsm::SolverConfig cfg;
  cfg.method = method;
  cfg.dt = 0.1;
  const bool backward = state.range(2) != 0;
  for (auto _ : state) {
    ctsm::Tape tape;
    const ctsm::ParamBinding b(tape, field.params, backward);
    const ctsm::Dynamics f = [&](double, const ctsm::Var& h) { return ctsm::mlp_forward(field.spec, b, "f", h); };
    const ctsm::Var end = ctsm::solve_to(f, tape.leaf(h0, false), 0.0, 4.0, cfg);
    if (backward) tape.backward(ctsm::sum(end));
    benchmark::DoNotOptimize(end.value().data().data());
  }
  state.SetLabel(std::string(ctsm::to_string(method)) + (backward ? "+backward" : ""));
}
BENCHMARK(BM_Solve)->ArgsProduct({{1, 2}, {1, 32}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
