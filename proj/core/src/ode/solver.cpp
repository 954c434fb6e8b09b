#include "ctsm/ode/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::euler: return "euler";
    case SolverMethod::rk4: return "rk4";
    case SolverMethod::dopri5: return "dopri5";
  }
  return "?";
}

SolverMethod solver_from_string(std::string_view name) {
  if (name == "euler") return SolverMethod::euler;
  if (name == "rk4") return SolverMethod::rk4;
  if (name == "dopri5") return SolverMethod::dopri5;
  throw ConfigError(fmt::format("unknown solver '{}' (euler|rk4|dopri5)", name));
}

void SolverConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (method != SolverMethod::dopri5 && !(dt > 0.0)) throw ConfigError("fixed step size must be positive");
  if (initial_step < 0.0) throw ConfigError("initial step must be >= 0");
}

std::size_t SolveResult::accepted_steps() const {
  return static_cast<std::size_t>(std::count_if(trace.begin(), trace.end(), [](const auto& r) { return r.accepted; }));
}

std::size_t SolveResult::rejected_steps() const { return trace.size() - accepted_steps(); }

namespace {

void check_finite(const Var& h, std::size_t step, double s) {
  if (!h.value().all_finite()) {
    throw DivergenceError(fmt::format("non-finite ODE state at step {} (s = {})", step, s));
  }
}

std::size_t fixed_step_count(double s0, double s1, double dt) {
  if (!(dt > 0.0)) throw ConfigError("fixed step size must be positive");
  if (s1 < s0) throw UsageError(fmt::format("fixed-step solve needs s1 >= s0 ({} < {})", s1, s0));
  const double span = s1 - s0;
  if (span == 0.0) return 0;
  auto n = static_cast<std::size_t>(std::ceil(span / dt));
  if (n > 0 && s0 + static_cast<double>(n - 1) * dt >= s1) --n;
  return std::max<std::size_t>(n, 1);
}

template <typename Step>
Var fixed_solve(const Var& h0, double s0, double s1, double dt, Step&& step) {
  const std::size_t n = fixed_step_count(s0, s1, dt);
  Var h = h0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = s0 + static_cast<double>(k) * dt;
    const double next = k + 1 == n ? s1 : s0 + static_cast<double>(k + 1) * dt;
    h = step(s, next - s, h);
    check_finite(h, k, next);
  }
  return h;
}

// Dormand-Prince tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr std::array<std::array<double, 6>, 7> kA{{
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
}};
constexpr std::array<double, 7> kB{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kE{71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525,   -1.0 / 40};
constexpr std::array<double, 7> kCMid{6025192743.0 / 30085553152.0 / 2.0,    0.0,
                                      51252292925.0 / 65400821598.0 / 2.0,   -2691868925.0 / 45128329728.0 / 2.0,
                                      187940372067.0 / 1594534317056.0 / 2.0, -1776094331.0 / 19743644256.0 / 2.0,
                                      11237099.0 / 235043384.0 / 2.0};

double error_norm(const Tensor& err, const Tensor& y0, const Tensor& y1, double rtol, double atol) {
  const std::size_t n = err.size();
  if (n == 0) return 0.0;
  const std::size_t rows = err.rank() >= 2 ? err.dim(0) : 1;
  const std::size_t per = n / rows;
  double worst = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t i = r * per; i < (r + 1) * per; ++i) {
      const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double q = err[i] / scale;
      acc += q * q;
    }
    worst = std::max(worst, std::sqrt(acc / static_cast<double>(per)));
  }
  return worst;
}

double rms_scaled(const Tensor& v, const Tensor& y0, double rtol, double atol) {
  return error_norm(v, y0, y0, rtol, atol);
}

// Automatic initial step from the local error model (Hairer, Norsett &
// Wanner, section II.4).
double initial_step(const Dynamics& f, const Var& h0, const Var& f0, double s0, double direction_span,
                    const SolverConfig& cfg, std::size_t& evals) {
  const Tensor& y0 = h0.value();
  const double d0 = rms_scaled(y0, y0, cfg.rtol, cfg.atol);
  const double d1 = rms_scaled(f0.value(), y0, cfg.rtol, cfg.atol);
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min(h, direction_span);

  Tape& tape = h0.tape();
  const std::size_t mark = tape.mark();
  double d2 = 0.0;
  {
    NoGradGuard guard(tape);
    const std::array<Var, 1> term{f0};
    const std::array<double, 1> coef{h};
    const Var y1 = linear_combination(h0, term, coef);
    const Var f1 = f(s0 + h, y1);
    ++evals;
    Tensor diff = f1.value();
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= f0.value()[i];
    d2 = rms_scaled(diff, y0, cfg.rtol, cfg.atol) / h;
  }
  tape.truncate(mark);

  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min(100.0 * h, h1);
}

// Quartic interpolant on an accepted step at x = (s - s0) / dt in [0, 1].
Var dense_eval(const Var& y0, const Var& y1, const std::array<Var, 7>& k, double dt, double x) {
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
  const double cy0 = -8 * x4 + 18 * x3 - 11 * x2 + 1;
  const double cy1 = -8 * x4 + 14 * x3 - 5 * x2;
  const double cmid = 16 * x4 - 32 * x3 + 16 * x2;
  const double cf0 = dt * (-2 * x4 + 5 * x3 - 4 * x2 + x);
  const double cf1 = dt * (2 * x4 - 3 * x3 + x2);
  std::vector<Var> terms{y0, y1};
  std::vector<double> coefs{cy0 + cmid, cy1};
  for (std::size_t i = 0; i < 7; ++i) {
    double c = cmid * dt * kCMid[i];
    if (i == 0) c += cf0;
    if (i == 6) c += cf1;
    if (c == 0.0) continue;
    terms.push_back(k[i]);
    coefs.push_back(c);
  }
  return linear_combination(std::span<const Var>(terms), std::span<const double>(coefs));
}

}  // namespace

Var euler_solve(const Dynamics& f, const Var& h0, double s0, double s1, double dt) {
  return fixed_solve(h0, s0, s1, dt, [&](double s, double step, const Var& h) {
    const std::array<Var, 1> k{f(s, h)};
    const std::array<double, 1> c{step};
    return linear_combination(h, k, c);
  });
}

Var rk4_solve(const Dynamics& f, const Var& h0, double s0, double s1, double dt) {
  return fixed_solve(h0, s0, s1, dt, [&](double s, double step, const Var& h) {
    const Var k1 = f(s, h);
    const std::array<Var, 1> t1{k1};
    const std::array<double, 1> half{0.5 * step};
    const Var k2 = f(s + 0.5 * step, linear_combination(h, t1, half));
    const std::array<Var, 1> t2{k2};
    const Var k3 = f(s + 0.5 * step, linear_combination(h, t2, half));
    const std::array<Var, 1> t3{k3};
    const std::array<double, 1> full{step};
    const Var k4 = f(s + step, linear_combination(h, t3, full));
    const std::array<Var, 4> ks{k1, k2, k3, k4};
    const std::array<double, 4> w{step / 6.0, step / 3.0, step / 3.0, step / 6.0};
    return linear_combination(h, ks, w);
  });
}

SolveResult dopri5_solve(const Dynamics& f, const Var& h0, double s0, std::span<const double> times,
                         const SolverConfig& cfg) {
  cfg.validate();
  SolveResult result;
  if (times.empty()) return result;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < s0 || (i > 0 && times[i] < times[i - 1])) {
      throw UsageError("requested times must be finite, sorted and >= s0");
    }
  }
  std::size_t next = 0;
  while (next < times.size() && times[next] == s0) {
    result.states.push_back(h0);
    ++next;
  }
  if (next == times.size()) return result;

  Tape& tape = h0.tape();
  const double s_end = times.back();
  double s = s0;
  Var y = h0;
  Var k1 = f(s, y);
  ++result.evaluations;
  double dt = cfg.initial_step > 0.0 ? cfg.initial_step
                                     : initial_step(f, y, k1, s, s_end - s0, cfg, result.evaluations);
  double smallest = dt;
  std::size_t attempts = 0;

  while (next < times.size()) {
    if (attempts >= cfg.max_steps) {
      throw NonConvergenceError(fmt::format("dopri5 exceeded {} steps at s = {} (smallest step {:.3e})",
                                            cfg.max_steps, s, smallest));
    }
    ++attempts;
    bool lands = false;
    if (!cfg.dense_output && s + dt >= times[next]) {
      dt = times[next] - s;
      lands = true;
    } else if (s + dt >= s_end) {
      dt = s_end - s;
      lands = true;
    }
    if (!(s + dt > s)) {
      throw NonConvergenceError(fmt::format("dopri5 step size underflow at s = {} (dt = {:.3e})", s, dt));
    }
    smallest = std::min(smallest, dt);

    const std::size_t mark = tape.mark();
    std::array<Var, 7> k;
    k[0] = k1;
    for (std::size_t st = 1; st < 7; ++st) {
      std::vector<Var> terms;
      std::vector<double> coefs;
      for (std::size_t j = 0; j < st; ++j) {
        if (kA[st][j] == 0.0) continue;
        terms.push_back(k[j]);
        coefs.push_back(dt * kA[st][j]);
      }
      const Var yi = linear_combination(y, terms, coefs);
      if (st == 6) {
        k[6] = f(s + dt, yi);
        Tensor err(y.shape());
        for (std::size_t j = 0; j < 7; ++j) {
          if (kE[j] == 0.0) continue;
          const auto& kv = k[j].value().values();
          for (std::size_t i = 0; i < err.size(); ++i) err[i] += dt * kE[j] * kv[i];
        }
        result.evaluations += 1;
        const double norm = error_norm(err, y.value(), yi.value(), cfg.rtol, cfg.atol);
        const bool accept = norm <= 1.0 && yi.value().all_finite();
        result.trace.push_back({result.trace.size(), s, dt, norm, accept});
        const double factor =
            !std::isfinite(norm) ? 0.2 : norm == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 10.0);
        if (!accept) {
          tape.truncate(mark);
          dt *= std::min(factor, 1.0);
          break;
        }
        const double s_new = lands ? (cfg.dense_output ? s_end : times[next]) : s + dt;
        if (cfg.dense_output) {
          while (next < times.size() && times[next] <= s_new) {
            const double x = (times[next] - s) / dt;
            result.states.push_back(times[next] == s_new ? yi : dense_eval(y, yi, k, dt, x));
            ++next;
          }
        } else if (lands) {
          while (next < times.size() && times[next] == s_new) {
            result.states.push_back(yi);
            ++next;
          }
        }
        check_finite(yi, result.trace.size() - 1, s_new);
        y = yi;
        k1 = k[6];
        s = s_new;
        dt *= factor;
        break;
      }
      k[st] = f(s + kC[st] * dt, yi);
      ++result.evaluations;
    }
  }
  return result;
}

SolveResult odesolve(const Dynamics& f, const Var& h0, double s0, std::span<const double> times,
                     const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.method == SolverMethod::dopri5) return dopri5_solve(f, h0, s0, times, cfg);
  SolveResult result;
  Var h = h0;
  double s = s0;
  for (double t : times) {
    if (t < s) throw UsageError("requested times must be sorted and >= s0");
    h = cfg.method == SolverMethod::euler ? euler_solve(f, h, s, t, cfg.dt) : rk4_solve(f, h, s, t, cfg.dt);
    result.states.push_back(h);
    s = t;
  }
  return result;
}

Var solve_to(const Dynamics& f, const Var& h0, double s0, double s1, const SolverConfig& cfg) {
  const std::array<double, 1> t{s1};
  return odesolve(f, h0, s0, t, cfg).states.front();
}

Var solve_backwards(const Dynamics& f, const Var& h1, double t1, double t0, const SolverConfig& cfg,
                    std::vector<StepRecord>* trace) {
  if (t1 < t0) throw UsageError(fmt::format("solve_backwards needs t1 >= t0 ({} < {})", t1, t0));
  const Dynamics reversed = [&f](double tau, const Var& h) { return neg(f(-tau, h)); };
  const std::array<double, 1> t{-t0};
  auto r = odesolve(reversed, h1, -t1, t, cfg);
  if (trace) *trace = std::move(r.trace);
  return r.states.front();
}

void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace) {
  out << "step,s,accepted,err_norm,dt\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{:.17g},{},{:.17g},{:.17g}\n", r.step, r.s, r.accepted ? 1 : 0, r.err_norm, r.dt);
  }
}

}  // namespace ctsm
