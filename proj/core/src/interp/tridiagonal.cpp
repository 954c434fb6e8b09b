#include "ctsm/interp/tridiagonal.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::vector<double> tridiagonal_solve(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n || (n > 0 && (sub.size() != n - 1 || sup.size() != n - 1))) {
    throw DimensionError(fmt::format("tridiagonal system: diag {}, sub {}, sup {}, rhs {}", n, sub.size(),
                                     sup.size(), rhs.size()));
  }
  if (n == 0) return {};

  constexpr double tiny = std::numeric_limits<double>::min();
  std::vector<double> cp(n, 0.0);
  std::vector<double> x(n, 0.0);
  double pivot = diag[0];
  if (std::abs(pivot) < tiny) throw SingularSystemError("tridiagonal system: zero pivot at row 0");
  if (n > 1) cp[0] = sup[0] / pivot;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - sub[i - 1] * cp[i - 1];
    if (std::abs(pivot) < tiny || !std::isfinite(pivot)) {
      throw SingularSystemError(fmt::format("tridiagonal system: zero pivot at row {}", i));
    }
    if (i + 1 < n) cp[i] = sup[i] / pivot;
    x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

}  // namespace ctsm
