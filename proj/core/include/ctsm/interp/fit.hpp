#pragma once

#include <span>
#include <vector>

#include "ctsm/interp/cubic.hpp"

namespace ctsm {

// Fits over fully observed points (t_j, x_j) with strictly increasing t.
// Each returns one piece per interval [t_j, t_{j+1}] in offset u = t - t_j;
// a single point yields one constant piece.
std::vector<CubicPiece> fit_linear(std::span<const double> t, std::span<const double> x);

// Slopes m_j = (x_j - x_{j-1}) / (t_j - t_{j-1}) with m_0 = m_1; each piece
// matches values and these slopes at both ends.
std::vector<CubicPiece> fit_hermite(std::span<const double> t, std::span<const double> x);

// Zero slope at every knot, so monotone data gives a monotone curve.
std::vector<CubicPiece> fit_monotonic(std::span<const double> t, std::span<const double> x);

// Natural cubic spline (zero curvature at both ends). Two points fall back to
// the straight line.
std::vector<CubicPiece> fit_natural(std::span<const double> t, std::span<const double> x);

// Second derivatives k_j of the natural spline at the knots.
std::vector<double> natural_curvatures(std::span<const double> t, std::span<const double> x);

std::vector<CubicPiece> fit_points(FitMethod method, std::span<const double> t, std::span<const double> x);

// Re-expands a unit-spaced piece about its right end, giving the piece on the
// next unit interval that continues the same polynomial.
CubicPiece continue_missing_piece(const CubicPiece& prev) noexcept;

// Same polynomial re-expanded about u = shift.
CubicPiece shift_piece(const CubicPiece& p, double shift) noexcept;

// Fits one channel sampled at integer knots 0..n-1; NaN marks missing values.
// Gaps are bridged by continuing the fitted polynomial; before the first and
// after the last observation the value is held constant. Returns max(n-1, 1)
// unit pieces. Throws DataError if nothing is observed.
std::vector<CubicPiece> fit_channel(std::span<const double> values, FitMethod method);

}  // namespace ctsm
