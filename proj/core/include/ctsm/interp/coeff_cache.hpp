#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ctsm/interp/control_signal.hpp"

namespace ctsm {

// Coefficient cache layout, little-endian:
//
//   magic "CTSC", version u8 (= 1)
//   subjects u64, channels u64, roles u8[channels]
//   knots u64[subjects]
//   per subject, per channel, per piece: a b c d as f64
//
// A subject with k knots stores max(k - 1, 1) pieces per channel.
inline constexpr std::array<char, 4> kCoeffCacheMagic{'C', 'T', 'S', 'C'};
inline constexpr std::uint8_t kCoeffCacheVersion = 1;

void write_coeff_cache(std::ostream& out, const std::vector<ControlSignal>& signals);
void write_coeff_cache(const std::filesystem::path& path, const std::vector<ControlSignal>& signals);
std::vector<ControlSignal> read_coeff_cache(std::istream& in);
std::vector<ControlSignal> read_coeff_cache(const std::filesystem::path& path);

}  // namespace ctsm
