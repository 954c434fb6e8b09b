#pragma once

#include <cstdint>
#include <string_view>

namespace ctsm {

// Cubic in local offset u = s - i on the piece [i, i + 1):
//   X(i + u) = a u^3 + b u^2 + c u + d
struct CubicPiece {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  constexpr double value(double u) const noexcept { return ((a * u + b) * u + c) * u + d; }
  constexpr double slope(double u) const noexcept { return (3.0 * a * u + 2.0 * b) * u + c; }
  constexpr double curvature(double u) const noexcept { return 6.0 * a * u + 2.0 * b; }

  static constexpr CubicPiece constant(double v) noexcept { return {0.0, 0.0, 0.0, v}; }

  friend constexpr bool operator==(const CubicPiece&, const CubicPiece&) = default;
};

enum class FitMethod { linear, hermite, monotonic, natural };

// Interpolation scheme as selected by the user. The recti variants operate on
// the rectified (doubled) grid.
enum class Scheme { linear, hermite, natural, monotonic, rectilinear, recticubic };

enum class ChannelRole : std::uint8_t { feature = 0, count = 1, time = 2 };

std::string_view to_string(FitMethod m);
std::string_view to_string(Scheme s);
std::string_view to_string(ChannelRole r);
Scheme scheme_from_string(std::string_view name);

constexpr bool is_recti(Scheme s) noexcept { return s == Scheme::rectilinear || s == Scheme::recticubic; }

// Fit method used for channels of the given role under a scheme.
FitMethod fit_method_for(Scheme scheme, ChannelRole role) noexcept;

}  // namespace ctsm
