#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sllb/architecture.hpp"
#include "sllb/mask.hpp"
#include "sllb/network.hpp"
#include "sllb/param_vector.hpp"

namespace sllb {

// On-disk parameter container. Binary layout (all integers little-endian,
// explicit endian flag in the header):
//   magic "SLLB", u16 version, u8 endian flag (1 = little), u8 kind
//   architecture: u32 layer count, i64 sizes, u8 batchnorm flags, u8 activation
//   vectors: u8 order (0 for a single solution), u16 vector count, then per
//     vector the segment table (u32 count; each: i32 layer, u8 kind, u8 rank,
//     i64 dims) followed by the f64 payload
//   mask: u8 present flag, u64 bit count, packed bits (LSB-first)
//   bn state: u8 present flag, per hidden layer mean/var arrays
//   provenance: command string, config hash u64, seed u64, step i64, tag string
struct Checkpoint {
  uint16_t version = 1;
  Architecture arch;
  int order = 0;                     // 0 = plain solution, 2/3 = curve order
  std::vector<ParamVector> vectors;  // 1 for solutions, order+1 for curves
  std::optional<SparsityMask> mask;
  BnState bn;
  std::string command;
  uint64_t config_hash = 0;
  uint64_t seed = 0;
  int64_t step = 0;
  std::string tag;  // provenance label, e.g. "pruned"

  const ParamVector& params() const;  // the single vector of a solution checkpoint
};

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::vector<uint8_t>& bytes);

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace sllb
