#include "ctsm/interp/cubic.hpp"

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::string_view to_string(FitMethod m) {
  switch (m) {
    case FitMethod::linear: return "linear";
    case FitMethod::hermite: return "hermite";
    case FitMethod::monotonic: return "monotonic";
    case FitMethod::natural: return "natural";
  }
  return "?";
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::linear: return "linear";
    case Scheme::hermite: return "hermite";
    case Scheme::natural: return "natural";
    case Scheme::monotonic: return "monotonic";
    case Scheme::rectilinear: return "rectilinear";
    case Scheme::recticubic: return "recticubic";
  }
  return "?";
}

std::string_view to_string(ChannelRole r) {
  switch (r) {
    case ChannelRole::feature: return "feature";
    case ChannelRole::count: return "count";
    case ChannelRole::time: return "time";
  }
  return "?";
}

Scheme scheme_from_string(std::string_view name) {
  for (Scheme s : {Scheme::linear, Scheme::hermite, Scheme::natural, Scheme::monotonic, Scheme::rectilinear,
                   Scheme::recticubic}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError(fmt::format("unknown interpolation scheme '{}'", name));
}

FitMethod fit_method_for(Scheme scheme, ChannelRole role) noexcept {
  if (scheme == Scheme::linear || scheme == Scheme::rectilinear) return FitMethod::linear;
  if (role != ChannelRole::feature) return FitMethod::monotonic;
  switch (scheme) {
    case Scheme::hermite:
    case Scheme::recticubic: return FitMethod::hermite;
    case Scheme::natural: return FitMethod::natural;
    default: return FitMethod::monotonic;
  }
}

}  // namespace ctsm
