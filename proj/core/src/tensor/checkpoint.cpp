#include "ctsm/tensor/checkpoint.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ctsm/error.hpp"
#include "ctsm/io/binary.hpp"

namespace ctsm {

using io::read_le;
using io::write_le;

void write_checkpoint(std::ostream& out, const ParamSet& params) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  write_le<std::uint8_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.entries()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) write_le<std::uint64_t>(out, d);
    for (double v : p.value.data()) write_le<double>(out, v);
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void write_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
  write_checkpoint(out, params);
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw DataError("not a parameter checkpoint (bad magic)");
  }
  const auto version = read_le<std::uint8_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw DataError(fmt::format("unsupported checkpoint version {}", version));
  }
  const auto count = read_le<std::uint32_t>(in, "record count");
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto len = read_le<std::uint32_t>(in, "name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("truncated file while reading name");
    const auto rank = read_le<std::uint32_t>(in, "rank");
    if (rank > 8) throw DataError(fmt::format("implausible rank {} for '{}'", rank, name));
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(read_le<std::uint64_t>(in, "extent"));
    Tensor t(shape);
    for (double& v : t.data()) v = read_le<double>(in, "payload");
    out.push_back({std::move(name), std::move(t)});
  }
  return out;
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open checkpoint '{}'", path.string()));
  return read_checkpoint(in);
}

void load_checkpoint_into(const std::filesystem::path& path, ParamSet& params) {
  const auto records = read_checkpoint(path);
  if (records.size() != params.size()) {
    throw ConfigError(fmt::format("checkpoint has {} tensors, model expects {}", records.size(),
                                  params.size()));
  }
  for (const auto& rec : records) {
    const auto idx = params.find(rec.name);
    if (!idx) throw ConfigError(fmt::format("checkpoint tensor '{}' is not a model parameter", rec.name));
    Tensor& dst = params[*idx].value;
    if (dst.shape() != rec.value.shape()) {
      throw ConfigError(fmt::format("checkpoint tensor '{}' has shape {}, model expects {}", rec.name,
                                    to_string(rec.value.shape()), to_string(dst.shape())));
    }
    dst = rec.value;
  }
}

}  // namespace ctsm
