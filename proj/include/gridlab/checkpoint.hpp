#pragma once

#include <string>
#include <vector>

#include "gridlab/tensor.hpp"

namespace gridlab {

struct NamedTensor {
  std::string name;
  Tensor t;
};

// Versioned binary checkpoint: u32 magic, u32 version, u32 tensor count,
// then per tensor u32 name length, name bytes, u32 rank, i64 dims, raw
// little-endian f32 data. Round trips bit-exactly.
inline constexpr std::uint32_t kCheckpointMagic = 0x424c5247;  // "GRLB"
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

}  // namespace gridlab
