#pragma once

#include <filesystem>
#include <string>

#include "mma/param_store.hpp"

namespace mma {

// Flat binary parameter container.
// Layout: magic "MMAR", format version u32, parameter count u32, then per
// parameter: name length u16, UTF-8 name, rank u8, dims as u64, row-major
// f64 payload. All integers and floats little-endian. Round-trips bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_params(const ParamStore& params);
ParamStore deserialize_params(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace mma
