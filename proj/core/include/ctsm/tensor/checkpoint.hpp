#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctsm/tensor/params.hpp"

namespace ctsm {

// Parameter checkpoint layout (all integers and floats little-endian):
//
//   magic   "CTSP" (4 bytes)
//   version u8 (= 1)
//   count   u32
//   count x { name_len u32, name bytes, rank u32, extents u64[rank],
//             payload f64[prod(extents)] }
inline constexpr std::array<char, 4> kCheckpointMagic{'C', 'T', 'S', 'P'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

void write_checkpoint(std::ostream& out, const ParamSet& params);
void write_checkpoint(const std::filesystem::path& path, const ParamSet& params);

std::vector<NamedTensor> read_checkpoint(std::istream& in);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

// Overwrites values of `params` from a checkpoint; names and shapes must match
// one-to-one.
void load_checkpoint_into(const std::filesystem::path& path, ParamSet& params);

}  // namespace ctsm
