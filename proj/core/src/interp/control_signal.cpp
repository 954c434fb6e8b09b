#include "ctsm/interp/control_signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ctsm/error.hpp"
#include "ctsm/interp/fit.hpp"

namespace ctsm {

ControlSignal::ControlSignal(std::size_t knots, std::vector<ChannelRole> roles,
                             const std::vector<std::vector<CubicPiece>>& pieces)
    : knots_(knots), pieces_(knots > 1 ? knots - 1 : 1), roles_(std::move(roles)) {
  if (knots == 0) throw DataError("control signal needs at least one knot");
  if (pieces.size() != roles_.size()) {
    throw DimensionError(fmt::format("control signal: {} channel roles but {} fitted channels", roles_.size(),
                                     pieces.size()));
  }
  coeffs_.resize(pieces_ * roles_.size());
  for (std::size_t c = 0; c < pieces.size(); ++c) {
    if (pieces[c].size() != pieces_) {
      throw DimensionError(fmt::format("channel {} has {} pieces, expected {}", c, pieces[c].size(), pieces_));
    }
    for (std::size_t i = 0; i < pieces_; ++i) coeffs_[i * roles_.size() + c] = pieces[c][i];
  }
}

std::vector<std::size_t> ControlSignal::channels_with_role(ChannelRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == role) out.push_back(c);
  }
  return out;
}

std::size_t ControlSignal::piece_index(double s) const noexcept {
  if (!(s > 0.0)) return 0;
  const double f = std::floor(s);
  if (f >= static_cast<double>(pieces_ - 1)) return pieces_ - 1;
  return static_cast<std::size_t>(f);
}

void ControlSignal::evaluate(double s, std::span<double> out) const {
  const double clamped = std::clamp(s, 0.0, end());
  evaluate_in_piece(piece_index(clamped), clamped, out);
}

void ControlSignal::derivative(double s, std::span<double> out) const {
  if (s < 0.0 || s > end() || knots_ == 1) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  derivative_in_piece(piece_index(s), s, out);
}

std::vector<double> ControlSignal::evaluate(double s) const {
  std::vector<double> out(channel_count());
  evaluate(s, out);
  return out;
}

std::vector<double> ControlSignal::derivative(double s) const {
  std::vector<double> out(channel_count());
  derivative(s, out);
  return out;
}

void ControlSignal::evaluate_in_piece(std::size_t index, double s, std::span<double> out) const {
  const double u = s - static_cast<double>(index);
  const auto row = piece_row(index);
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = row[c].value(u);
}

void ControlSignal::derivative_in_piece(std::size_t index, double s, std::span<double> out) const {
  const double u = s - static_cast<double>(index);
  const auto row = piece_row(index);
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = row[c].slope(u);
}

ControlSignal build_control_signal(const std::vector<std::vector<double>>& channels,
                                   const std::vector<ChannelRole>& roles, Scheme scheme) {
  if (channels.empty()) throw DataError("control signal needs at least one channel");
  if (channels.size() != roles.size()) {
    throw DimensionError(fmt::format("{} channels but {} roles", channels.size(), roles.size()));
  }
  const std::size_t n = channels.front().size();
  std::vector<std::vector<CubicPiece>> fitted;
  fitted.reserve(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != n) {
      throw DimensionError(fmt::format("channel {} has length {}, expected {}", c, channels[c].size(), n));
    }
    if (roles[c] == ChannelRole::time) {
      double prev = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double v = channels[c][i];
        if (std::isnan(v)) continue;
        if (v < prev) throw DataError(fmt::format("time channel decreases at knot {} ({} < {})", i, v, prev));
        prev = v;
      }
    }
    fitted.push_back(fit_channel(channels[c], fit_method_for(scheme, roles[c])));
  }
  return ControlSignal(n, roles, fitted);
}

std::vector<SignalSample> sample_signal(const ControlSignal& signal, std::size_t per_piece) {
  per_piece = std::max<std::size_t>(per_piece, 1);
  std::vector<SignalSample> out;
  const std::size_t total = (signal.knot_count() - 1) * per_piece;
  for (std::size_t k = 0; k <= total; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(per_piece);
    out.push_back({s, signal.evaluate(s), signal.derivative(s)});
  }
  return out;
}

}  // namespace ctsm
