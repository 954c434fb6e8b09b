#include "ctsm/interp/coeff_cache.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ctsm/error.hpp"
#include "ctsm/io/binary.hpp"

namespace ctsm {

using io::read_le;
using io::write_le;

void write_coeff_cache(std::ostream& out, const std::vector<ControlSignal>& signals) {
  const std::size_t channels = signals.empty() ? 0 : signals.front().channel_count();
  for (const auto& s : signals) {
    if (s.roles() != signals.front().roles()) throw DimensionError("coefficient cache: channel layouts differ");
  }
  out.write(kCoeffCacheMagic.data(), kCoeffCacheMagic.size());
  write_le<std::uint8_t>(out, kCoeffCacheVersion);
  write_le<std::uint64_t>(out, signals.size());
  write_le<std::uint64_t>(out, channels);
  if (!signals.empty()) {
    for (ChannelRole r : signals.front().roles()) write_le<std::uint8_t>(out, static_cast<std::uint8_t>(r));
  }
  for (const auto& s : signals) write_le<std::uint64_t>(out, s.knot_count());
  for (const auto& s : signals) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < s.piece_count(); ++i) {
        const CubicPiece& p = s.piece(c, i);
        write_le(out, p.a);
        write_le(out, p.b);
        write_le(out, p.c);
        write_le(out, p.d);
      }
    }
  }
  if (!out) throw DataError("failed writing coefficient cache");
}

void write_coeff_cache(const std::filesystem::path& path, const std::vector<ControlSignal>& signals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
  write_coeff_cache(out, signals);
}

std::vector<ControlSignal> read_coeff_cache(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCoeffCacheMagic) {
    throw DataError("not a coefficient cache (bad magic)");
  }
  const auto version = read_le<std::uint8_t>(in, "version");
  if (version != kCoeffCacheVersion) throw DataError(fmt::format("unsupported cache version {}", version));
  const auto subjects = read_le<std::uint64_t>(in, "subject count");
  const auto channels = read_le<std::uint64_t>(in, "channel count");
  std::vector<ChannelRole> roles(channels);
  for (auto& r : roles) {
    const auto raw = read_le<std::uint8_t>(in, "channel role");
    if (raw > 2) throw DataError(fmt::format("invalid channel role {}", raw));
    r = static_cast<ChannelRole>(raw);
  }
  std::vector<std::uint64_t> knots(subjects);
  for (auto& k : knots) {
    k = read_le<std::uint64_t>(in, "knot count");
    if (k == 0) throw DataError("coefficient cache: subject with zero knots");
  }
  std::vector<ControlSignal> out;
  out.reserve(subjects);
  for (std::uint64_t s = 0; s < subjects; ++s) {
    const std::size_t pieces = knots[s] > 1 ? knots[s] - 1 : 1;
    std::vector<std::vector<CubicPiece>> fitted(channels, std::vector<CubicPiece>(pieces));
    for (auto& channel : fitted) {
      for (auto& p : channel) {
        p.a = read_le<double>(in, "coefficient");
        p.b = read_le<double>(in, "coefficient");
        p.c = read_le<double>(in, "coefficient");
        p.d = read_le<double>(in, "coefficient");
      }
    }
    out.emplace_back(knots[s], roles, fitted);
  }
  return out;
}

std::vector<ControlSignal> read_coeff_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open coefficient cache '{}'", path.string()));
  return read_coeff_cache(in);
}

}  // namespace ctsm
