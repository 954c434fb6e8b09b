#include "ctsm/interp/fit.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"
#include "ctsm/interp/tridiagonal.hpp"

namespace ctsm {

namespace {

void check_points(std::span<const double> t, std::span<const double> x, const char* who) {
  if (t.size() != x.size()) {
    throw DimensionError(fmt::format("{}: {} times but {} values", who, t.size(), x.size()));
  }
  if (t.empty()) throw DataError(fmt::format("{}: empty signal", who));
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!std::isfinite(t[j]) || !std::isfinite(x[j])) {
      throw DataError(fmt::format("{}: non-finite point at index {}", who, j));
    }
    if (j > 0 && !(t[j] > t[j - 1])) {
      throw DataError(fmt::format("{}: knots must be strictly increasing (index {})", who, j));
    }
  }
}

}  // namespace

std::vector<CubicPiece> fit_linear(std::span<const double> t, std::span<const double> x) {
  check_points(t, x, "fit_linear");
  if (t.size() == 1) return {CubicPiece::constant(x[0])};
  std::vector<CubicPiece> out;
  out.reserve(t.size() - 1);
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    out.push_back({0.0, 0.0, (x[j + 1] - x[j]) / (t[j + 1] - t[j]), x[j]});
  }
  return out;
}

std::vector<CubicPiece> fit_hermite(std::span<const double> t, std::span<const double> x) {
  check_points(t, x, "fit_hermite");
  const std::size_t n = t.size();
  if (n == 1) return {CubicPiece::constant(x[0])};
  std::vector<double> m(n);
  for (std::size_t j = 1; j < n; ++j) m[j] = (x[j] - x[j - 1]) / (t[j] - t[j - 1]);
  m[0] = m[1];
  std::vector<CubicPiece> out;
  out.reserve(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = t[j + 1] - t[j];
    const double delta = (x[j + 1] - x[j]) / h;
    out.push_back({(m[j] + m[j + 1] - 2.0 * delta) / (h * h), (3.0 * delta - 2.0 * m[j] - m[j + 1]) / h, m[j],
                   x[j]});
  }
  return out;
}

std::vector<CubicPiece> fit_monotonic(std::span<const double> t, std::span<const double> x) {
  check_points(t, x, "fit_monotonic");
  if (t.size() == 1) return {CubicPiece::constant(x[0])};
  std::vector<CubicPiece> out;
  out.reserve(t.size() - 1);
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double h = t[j + 1] - t[j];
    const double dx = x[j + 1] - x[j];
    out.push_back({-2.0 * dx / (h * h * h), 3.0 * dx / (h * h), 0.0, x[j]});
  }
  return out;
}

std::vector<double> natural_curvatures(std::span<const double> t, std::span<const double> x) {
  check_points(t, x, "fit_natural");
  const std::size_t n = t.size();
  std::vector<double> k(n, 0.0);
  if (n < 3) return k;
  const std::size_t m = n - 2;
  std::vector<double> sub(m - 1), diag(m), sup(m - 1), rhs(m);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = r + 1;
    const double hl = t[i] - t[i - 1];
    const double hr = t[i + 1] - t[i];
    diag[r] = 2.0 * (hl + hr);
    rhs[r] = 6.0 * ((x[i + 1] - x[i]) / hr - (x[i] - x[i - 1]) / hl);
    if (r > 0) sub[r - 1] = hl;
    if (r + 1 < m) sup[r] = hr;
  }
  const auto interior = tridiagonal_solve(sub, diag, sup, rhs);
  for (std::size_t r = 0; r < m; ++r) k[r + 1] = interior[r];
  return k;
}

std::vector<CubicPiece> fit_natural(std::span<const double> t, std::span<const double> x) {
  const auto k = natural_curvatures(t, x);
  const std::size_t n = t.size();
  if (n < 3) return fit_linear(t, x);
  std::vector<CubicPiece> out;
  out.reserve(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = t[j + 1] - t[j];
    const double delta = (x[j + 1] - x[j]) / h;
    out.push_back({(k[j + 1] - k[j]) / (6.0 * h), 0.5 * k[j], delta - h * (2.0 * k[j] + k[j + 1]) / 6.0, x[j]});
  }
  return out;
}

std::vector<CubicPiece> fit_points(FitMethod method, std::span<const double> t, std::span<const double> x) {
  switch (method) {
    case FitMethod::linear: return fit_linear(t, x);
    case FitMethod::hermite: return fit_hermite(t, x);
    case FitMethod::monotonic: return fit_monotonic(t, x);
    case FitMethod::natural: return fit_natural(t, x);
  }
  throw ConfigError("unknown fit method");
}

CubicPiece continue_missing_piece(const CubicPiece& p) noexcept {
  return {p.a, 3.0 * p.a + p.b, 3.0 * p.a + 2.0 * p.b + p.c, p.a + p.b + p.c + p.d};
}

CubicPiece shift_piece(const CubicPiece& p, double s) noexcept {
  return {p.a, 3.0 * p.a * s + p.b, p.slope(s), p.value(s)};
}

std::vector<CubicPiece> fit_channel(std::span<const double> values, FitMethod method) {
  const std::size_t n = values.size();
  if (n == 0) throw DataError("fit_channel: empty signal");
  std::vector<double> t, x;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(values[i])) continue;
    t.push_back(static_cast<double>(i));
    x.push_back(values[i]);
  }
  if (x.empty()) throw DataError("fit_channel: channel has no observed values");

  const std::size_t pieces = n > 1 ? n - 1 : 1;
  std::vector<CubicPiece> out(pieces);
  const auto fitted = fit_points(method, t, x);
  const auto first = static_cast<std::size_t>(t.front());
  const auto last = static_cast<std::size_t>(t.back());
  for (std::size_t i = 0; i < pieces; ++i) {
    if (i < first) {
      out[i] = CubicPiece::constant(x.front());
    } else if (i >= last) {
      out[i] = CubicPiece::constant(x.back());
    }
  }
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const auto lo = static_cast<std::size_t>(t[j]);
    const auto hi = static_cast<std::size_t>(t[j + 1]);
    out[lo] = fitted[j];
    for (std::size_t i = lo + 1; i < hi; ++i) out[i] = continue_missing_piece(out[i - 1]);
  }
  return out;
}

}  // namespace ctsm
