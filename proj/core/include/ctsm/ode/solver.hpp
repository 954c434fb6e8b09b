#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ctsm/tensor/ops.hpp"

namespace ctsm {

// dh/ds = f(s, h). The closure records its work on h's tape, so solutions
// are differentiable with respect to h0 and anything f captures.
using Dynamics = std::function<Var(double s, const Var& h)>;

enum class SolverMethod { euler, rk4, dopri5 };

std::string_view to_string(SolverMethod m);
SolverMethod solver_from_string(std::string_view name);

struct SolverConfig {
  SolverMethod method = SolverMethod::dopri5;
  double rtol = 1e-5;
  double atol = 1e-7;
  double initial_step = 0.0;  // 0 selects the step automatically
  std::size_t max_steps = 10'000;
  double dt = 0.1;  // fixed-step methods
  // Step across requested times and interpolate; otherwise steps are
  // shortened to land on each requested time.
  bool dense_output = true;

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  double s = 0.0;
  double dt = 0.0;
  double err_norm = 0.0;
  bool accepted = true;
};

struct SolveResult {
  std::vector<Var> states;  // one per requested time
  std::vector<StepRecord> trace;
  std::size_t evaluations = 0;

  std::size_t accepted_steps() const;
  std::size_t rejected_steps() const;
};

// Fixed-step methods: ceil((s1 - s0) / dt) steps, the last one shortened.
Var euler_solve(const Dynamics& f, const Var& h0, double s0, double s1, double dt);
Var rk4_solve(const Dynamics& f, const Var& h0, double s0, double s1, double dt);

// Dormand-Prince 5(4) with FSAL, an I-controller and quartic dense output.
// The error norm is the RMS of e / (atol + rtol max(|y0|, |y1|)) over each
// batch row (leading axis), maximised over rows. Rejected steps are erased
// from the tape. Throws NonConvergenceError after max_steps attempts.
SolveResult dopri5_solve(const Dynamics& f, const Var& h0, double s0, std::span<const double> times,
                         const SolverConfig& config);

// Dispatches on config.method; `times` sorted ascending with times[0] >= s0.
SolveResult odesolve(const Dynamics& f, const Var& h0, double s0, std::span<const double> times,
                     const SolverConfig& config);
Var solve_to(const Dynamics& f, const Var& h0, double s0, double s1, const SolverConfig& config);

// State at t0 <= t1 given h(t1), by solving dh/dtau = -f(-tau, h) forward
// from -t1 to -t0.
Var solve_backwards(const Dynamics& f, const Var& h1, double t1, double t0, const SolverConfig& config,
                    std::vector<StepRecord>* trace = nullptr);

// Columns: step, s, accepted, err_norm, dt.
void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace);

}  // namespace ctsm
