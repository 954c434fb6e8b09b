#pragma once

#include <span>
#include <vector>

namespace ctsm {

// Thomas algorithm. `sub` and `sup` have n - 1 entries, `diag` and `rhs` n.
// Throws SingularSystemError on a zero pivot.
std::vector<double> tridiagonal_solve(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs);

}  // namespace ctsm
