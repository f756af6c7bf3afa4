#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sllb/dataset.hpp"

namespace sllb {

// One parsed IDX tensor: unsigned-byte payload in row-major order.
struct IdxTensor {
  std::vector<int64_t> dims;
  std::vector<uint8_t> data;

  int64_t rank() const { return static_cast<int64_t>(dims.size()); }
  int64_t element_count() const;
};

// IDX byte layout: bytes 0-1 zero, byte 2 = 0x08 (unsigned byte), byte 3 =
// rank; then rank big-endian u32 dimension sizes; then the payload.
IdxTensor parse_idx(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> serialize_idx(const IdxTensor& tensor);

IdxTensor read_idx_file(const std::string& path);
void write_idx_file(const std::string& path, const IdxTensor& tensor);

// Builds a Dataset from an images tensor (rank >= 2; trailing dims flattened
// to features, scaled to [0,1] by /255) and a rank-1 labels tensor.
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         uint64_t split_seed);

}  // namespace sllb
