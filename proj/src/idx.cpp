#include "sllb/idx.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "sllb/error.hpp"
#include "sllb/rng.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

std::string byte_hex(uint8_t b) {
  char buf[5];
  std::snprintf(buf, sizeof(buf), "0x%02x", b);
  return buf;
}

uint32_t read_be_u32(const std::vector<uint8_t>& bytes, size_t offset) {
  return (static_cast<uint32_t>(bytes[offset]) << 24) |
         (static_cast<uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<uint32_t>(bytes[offset + 3]);
}

void append_be_u32(std::vector<uint8_t>& bytes, uint32_t v) {
  bytes.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
  bytes.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  bytes.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  bytes.push_back(static_cast<uint8_t>(v & 0xff));
}

}  // namespace

int64_t IdxTensor::element_count() const {
  int64_t n = 1;
  for (int64_t d : dims) n *= d;
  return n;
}

IdxTensor parse_idx(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4) {
    throw ValidationError("idx: file too short for magic, expected at least 4 bytes, got " +
                          std::to_string(bytes.size()));
  }
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw ValidationError("idx: bad magic, bytes 0-1 must be zero, got " + byte_hex(bytes[0]) +
                          " " + byte_hex(bytes[1]));
  }
  if (bytes[2] != 0x08) {
    throw ValidationError("idx: unsupported type code " + byte_hex(bytes[2]) +
                          " (only 0x08 unsigned byte is supported)");
  }
  int64_t rank = bytes[3];
  if (rank < 1) throw ValidationError("idx: rank byte must be >= 1, got " + byte_hex(bytes[3]));

  size_t header_len = 4 + 4 * static_cast<size_t>(rank);
  if (bytes.size() < header_len) {
    throw ValidationError("idx: truncated header, expected " + std::to_string(header_len) +
                          " bytes for rank " + std::to_string(rank) + ", got " +
                          std::to_string(bytes.size()));
  }
  IdxTensor t;
  t.dims.reserve(static_cast<size_t>(rank));
  for (int64_t i = 0; i < rank; ++i) {
    t.dims.push_back(static_cast<int64_t>(read_be_u32(bytes, 4 + 4 * static_cast<size_t>(i))));
  }
  size_t expected = static_cast<size_t>(t.element_count());
  size_t actual = bytes.size() - header_len;
  if (actual != expected) {
    throw ValidationError("idx: payload truncated or oversized, expected " +
                          std::to_string(expected) + " payload bytes, got " +
                          std::to_string(actual));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header_len), bytes.end());
  return t;
}

std::vector<uint8_t> serialize_idx(const IdxTensor& tensor) {
  if (tensor.dims.empty()) throw ValidationError("idx: cannot serialize rank-0 tensor");
  if (tensor.dims.size() > 255) throw ValidationError("idx: rank exceeds 255");
  for (int64_t d : tensor.dims) {
    if (d < 0 || d > static_cast<int64_t>(UINT32_MAX)) {
      throw ValidationError("idx: dimension " + std::to_string(d) + " not representable as u32");
    }
  }
  if (static_cast<int64_t>(tensor.data.size()) != tensor.element_count()) {
    throw ValidationError("idx: data length " + std::to_string(tensor.data.size()) +
                          " does not match dims product " + std::to_string(tensor.element_count()));
  }
  std::vector<uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.data.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(0x08);
  out.push_back(static_cast<uint8_t>(tensor.dims.size()));
  for (int64_t d : tensor.dims) append_be_u32(out, static_cast<uint32_t>(d));
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

IdxTensor read_idx_file(const std::string& path) {
  std::string content = read_file(path);
  std::vector<uint8_t> bytes(content.begin(), content.end());
  try {
    return parse_idx(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_idx_file(const std::string& path, const IdxTensor& tensor) {
  auto bytes = serialize_idx(tensor);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         uint64_t split_seed) {
  IdxTensor images = read_idx_file(images_path);
  IdxTensor labels = read_idx_file(labels_path);
  if (images.rank() < 2) {
    throw ValidationError(images_path + ": images tensor must have rank >= 2, got rank " +
                          std::to_string(images.rank()));
  }
  if (labels.rank() != 1) {
    throw ValidationError(labels_path + ": labels tensor must have rank 1, got rank " +
                          std::to_string(labels.rank()));
  }
  if (images.dims[0] != labels.dims[0]) {
    throw ValidationError("idx: image count " + std::to_string(images.dims[0]) +
                          " != label count " + std::to_string(labels.dims[0]));
  }
  int64_t n = images.dims[0];
  int64_t features_per = images.element_count() / std::max<int64_t>(n, 1);

  Dataset ds;
  ds.features = Matrix(n, features_per);
  for (int64_t r = 0; r < n; ++r) {
    for (int64_t c = 0; c < features_per; ++c) {
      ds.features(r, c) =
          static_cast<double>(images.data[static_cast<size_t>(r * features_per + c)]) / 255.0;
    }
  }
  ds.labels.assign(labels.data.begin(), labels.data.end());
  int64_t max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.n_classes = max_label + 1;
  if (ds.n_classes < 2) ds.n_classes = 2;

  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(Rng::derive(split_seed, 0x73706c6974ull));
  rng.shuffle(perm);
  int64_t n_train = (4 * n) / 5;
  ds.train_idx.assign(perm.begin(), perm.begin() + n_train);
  ds.test_idx.assign(perm.begin() + n_train, perm.end());
  std::sort(ds.train_idx.begin(), ds.train_idx.end());
  std::sort(ds.test_idx.begin(), ds.test_idx.end());
  ds.id = ds.content_hash();
  ds.validate();
  return ds;
}

}  // namespace sllb
