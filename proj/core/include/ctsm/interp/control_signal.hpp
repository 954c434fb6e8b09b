#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsm/interp/cubic.hpp"

namespace ctsm {

// Multichannel piecewise cubic over integer knots 0..n-1. Outside [0, n-1]
// the value is held at the boundary and the derivative is zero. A length-1
// signal is stored as one constant piece.
class ControlSignal {
 public:
  ControlSignal() = default;
  // pieces[c] holds max(knots - 1, 1) pieces for channel c.
  ControlSignal(std::size_t knots, std::vector<ChannelRole> roles, const std::vector<std::vector<CubicPiece>>& pieces);

  std::size_t knot_count() const noexcept { return knots_; }
  std::size_t piece_count() const noexcept { return pieces_; }
  std::size_t channel_count() const noexcept { return roles_.size(); }
  const std::vector<ChannelRole>& roles() const noexcept { return roles_; }
  std::vector<std::size_t> channels_with_role(ChannelRole role) const;

  const CubicPiece& piece(std::size_t channel, std::size_t index) const {
    return coeffs_[index * roles_.size() + channel];
  }
  // All channels' pieces on interval `index`, channel-contiguous.
  std::span<const CubicPiece> piece_row(std::size_t index) const {
    return {coeffs_.data() + index * roles_.size(), roles_.size()};
  }

  // Piece used for s: floor(s) clamped to the valid range.
  std::size_t piece_index(double s) const noexcept;
  double end() const noexcept { return static_cast<double>(knots_ - 1); }

  void evaluate(double s, std::span<double> out) const;
  void derivative(double s, std::span<double> out) const;
  std::vector<double> evaluate(double s) const;
  std::vector<double> derivative(double s) const;

  // Evaluate using a fixed piece at offset s - index, without clamping; used
  // when integrating over a single interval so knots take one-sided limits.
  void evaluate_in_piece(std::size_t index, double s, std::span<double> out) const;
  void derivative_in_piece(std::size_t index, double s, std::span<double> out) const;

 private:
  std::size_t knots_ = 0;
  std::size_t pieces_ = 0;
  std::vector<ChannelRole> roles_;
  std::vector<CubicPiece> coeffs_;
};

// Fits every channel (values at knots 0..n-1, NaN = missing) with the method
// the scheme assigns to its role. Time channels must be non-decreasing over
// their observed values.
ControlSignal build_control_signal(const std::vector<std::vector<double>>& channels,
                                   const std::vector<ChannelRole>& roles, Scheme scheme);

struct SignalSample {
  double s;
  std::vector<double> value;
  std::vector<double> slope;
};

// Dense samples on [0, n-1] with `per_piece` points per unit interval.
std::vector<SignalSample> sample_signal(const ControlSignal& signal, std::size_t per_piece);

}  // namespace ctsm
