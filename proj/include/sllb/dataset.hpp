#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sllb/matrix.hpp"

namespace sllb {

enum class SyntheticKind { Blobs, Moons, Spirals };

SyntheticKind synthetic_kind_from_name(const std::string& name);
std::string synthetic_kind_name(SyntheticKind kind);

// Immutable after construction; the id is a content hash over the numeric
// payload (bit patterns, not text), so equal data means equal id everywhere.
struct Dataset {
  Matrix features;              // n_examples x n_features
  std::vector<int64_t> labels;  // in [0, n_classes)
  int64_t n_classes = 0;
  std::vector<int64_t> train_idx;
  std::vector<int64_t> test_idx;
  uint64_t id = 0;

  int64_t size() const { return features.rows(); }
  void validate() const;
  uint64_t content_hash() const;
};

// Deterministic generators. Features come out standardized (zero mean, unit
// variance per dimension); classes are balanced to within one example.
Dataset make_synthetic(SyntheticKind kind, int64_t n, double noise, uint64_t seed);

// Seeded permutation of [0, n) for (seed, epoch), cut into batch_size slices;
// the final short batch is kept.
std::vector<std::vector<int64_t>> batches(int64_t n, int64_t batch_size, uint64_t seed,
                                          int64_t epoch);

// Gathers rows/labels for one batch.
Matrix gather_rows(const Matrix& features, const std::vector<int64_t>& idx);
std::vector<int64_t> gather_labels(const std::vector<int64_t>& labels,
                                   const std::vector<int64_t>& idx);

// Streams shuffled train-split batches epoch after epoch (final short batch
// of each epoch kept). Deterministic given seed.
class BatchStream {
 public:
  BatchStream(const Dataset& data, int64_t batch_size, uint64_t seed);
  void next(Matrix& x, std::vector<int64_t>& y);

 private:
  void refill();

  const Dataset& data_;
  int64_t batch_size_;
  uint64_t seed_;
  int64_t epoch_ = 0;
  std::vector<std::vector<int64_t>> queue_;
  size_t cursor_ = 0;
};

}  // namespace sllb
