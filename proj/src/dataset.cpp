#include "sllb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sllb/error.hpp"
#include "sllb/rng.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

constexpr uint64_t kNoiseStream = 0x6e6f697365ull;  // "noise"
constexpr uint64_t kSplitStream = 0x73706c6974ull;  // "split"

// Class sizes for n examples over k classes, balanced to within one.
std::vector<int64_t> class_counts(int64_t n, int64_t k) {
  std::vector<int64_t> counts(static_cast<size_t>(k), n / k);
  for (int64_t j = 0; j < n % k; ++j) counts[static_cast<size_t>(j)] += 1;
  return counts;
}

void standardize(Matrix& m) {
  for (int64_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (int64_t r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    double var = 0.0;
    for (int64_t r = 0; r < m.rows(); ++r) {
      double d = m(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(m.rows());
    double sd = std::sqrt(var);
    if (sd < 1e-12) sd = 1.0;  // degenerate dimension: center only
    for (int64_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) / sd;
  }
}

void make_blobs(int64_t n, double noise, Rng& rng, Matrix& x, std::vector<int64_t>& y) {
  const int64_t k = 3;
  auto counts = class_counts(n, k);
  int64_t row = 0;
  for (int64_t j = 0; j < k; ++j) {
    double angle = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(k);
    double cx = 2.0 * std::cos(angle), cy = 2.0 * std::sin(angle);
    for (int64_t i = 0; i < counts[static_cast<size_t>(j)]; ++i, ++row) {
      x(row, 0) = cx + noise * rng.normal();
      x(row, 1) = cy + noise * rng.normal();
      y[static_cast<size_t>(row)] = j;
    }
  }
}

void make_moons(int64_t n, double noise, Rng& rng, Matrix& x, std::vector<int64_t>& y) {
  auto counts = class_counts(n, 2);
  int64_t row = 0;
  for (int64_t j = 0; j < 2; ++j) {
    int64_t m = counts[static_cast<size_t>(j)];
    for (int64_t i = 0; i < m; ++i, ++row) {
      double t = M_PI * static_cast<double>(i) / static_cast<double>(std::max<int64_t>(m - 1, 1));
      double px, py;
      if (j == 0) {
        px = std::cos(t);
        py = std::sin(t);
      } else {
        px = 1.0 - std::cos(t);
        py = 0.5 - std::sin(t);
      }
      x(row, 0) = px + noise * rng.normal();
      x(row, 1) = py + noise * rng.normal();
      y[static_cast<size_t>(row)] = j;
    }
  }
}

// Three interleaved spiral arms: radius sweeps (0,1], angle sweeps 1.5 turns
// per arm with evenly spaced arm offsets; `noise` perturbs the angle. The
// long sweep keeps the class boundary high-curvature, so capacity-starved
// networks visibly underfit while moderate ones solve it.
void make_spirals(int64_t n, double noise, Rng& rng, Matrix& x, std::vector<int64_t>& y) {
  const int64_t k = 3;
  auto counts = class_counts(n, k);
  int64_t row = 0;
  for (int64_t j = 0; j < k; ++j) {
    int64_t m = counts[static_cast<size_t>(j)];
    double offset = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(k);
    for (int64_t i = 0; i < m; ++i, ++row) {
      double r = static_cast<double>(i + 1) / static_cast<double>(m);
      double theta = offset + 2.0 * M_PI * r + noise * rng.normal();
      x(row, 0) = r * std::sin(theta);
      x(row, 1) = r * std::cos(theta);
      y[static_cast<size_t>(row)] = j;
    }
  }
}

}  // namespace

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "blobs") return SyntheticKind::Blobs;
  if (name == "moons") return SyntheticKind::Moons;
  if (name == "spirals") return SyntheticKind::Spirals;
  throw ValidationError("unknown dataset kind \"" + name + "\" (expected blobs, moons, or spirals)");
}

std::string synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Blobs: return "blobs";
    case SyntheticKind::Moons: return "moons";
    case SyntheticKind::Spirals: return "spirals";
  }
  throw ValidationError("invalid dataset kind");
}

void Dataset::validate() const {
  if (features.rows() != static_cast<int64_t>(labels.size())) {
    throw ValidationError("Dataset: features rows " + std::to_string(features.rows()) +
                          " != labels length " + std::to_string(labels.size()));
  }
  if (n_classes < 2) throw ValidationError("Dataset: n_classes must be >= 2");
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw ValidationError("Dataset: label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " + std::to_string(n_classes) + ")");
    }
  }
  std::vector<uint8_t> seen(static_cast<size_t>(size()), 0);
  auto check_split = [&](const std::vector<int64_t>& idx, const char* name) {
    for (int64_t i : idx) {
      if (i < 0 || i >= size()) {
        throw ValidationError(std::string("Dataset: ") + name + " index " + std::to_string(i) +
                              " out of range");
      }
      if (seen[static_cast<size_t>(i)]++) {
        throw ValidationError("Dataset: train/test splits overlap at index " + std::to_string(i));
      }
    }
  };
  check_split(train_idx, "train");
  check_split(test_idx, "test");
}

uint64_t Dataset::content_hash() const {
  Fnv1a64 h;
  h.update_u64(static_cast<uint64_t>(features.rows()));
  h.update_u64(static_cast<uint64_t>(features.cols()));
  for (double v : features.data()) h.update_f64(v);
  h.update_u64(static_cast<uint64_t>(n_classes));
  for (int64_t l : labels) h.update_u64(static_cast<uint64_t>(l));
  h.update_u64(static_cast<uint64_t>(train_idx.size()));
  for (int64_t i : train_idx) h.update_u64(static_cast<uint64_t>(i));
  h.update_u64(static_cast<uint64_t>(test_idx.size()));
  for (int64_t i : test_idx) h.update_u64(static_cast<uint64_t>(i));
  return h.digest();
}

Dataset make_synthetic(SyntheticKind kind, int64_t n, double noise, uint64_t seed) {
  if (n < 10) throw ValidationError("make_synthetic: n must be >= 10, got " + std::to_string(n));
  if (!(noise >= 0.0)) throw ValidationError("make_synthetic: noise must be >= 0");

  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.assign(static_cast<size_t>(n), 0);
  Rng rng(Rng::derive(seed, kNoiseStream));
  switch (kind) {
    case SyntheticKind::Blobs:
      ds.n_classes = 3;
      make_blobs(n, noise, rng, ds.features, ds.labels);
      break;
    case SyntheticKind::Moons:
      ds.n_classes = 2;
      make_moons(n, noise, rng, ds.features, ds.labels);
      break;
    case SyntheticKind::Spirals:
      ds.n_classes = 3;
      make_spirals(n, noise, rng, ds.features, ds.labels);
      break;
  }
  standardize(ds.features);

  // even split from a seeded shuffle: the test half doubles as a
  // fine-grained accuracy meter for method comparisons
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng split_rng(Rng::derive(seed, kSplitStream));
  split_rng.shuffle(perm);
  int64_t n_train = n / 2;
  ds.train_idx.assign(perm.begin(), perm.begin() + n_train);
  ds.test_idx.assign(perm.begin() + n_train, perm.end());
  std::sort(ds.train_idx.begin(), ds.train_idx.end());
  std::sort(ds.test_idx.begin(), ds.test_idx.end());

  ds.id = ds.content_hash();
  ds.validate();
  return ds;
}

std::vector<std::vector<int64_t>> batches(int64_t n, int64_t batch_size, uint64_t seed,
                                          int64_t epoch) {
  if (n < 1) throw ValidationError("batches: n must be >= 1");
  if (batch_size < 1) throw ValidationError("batches: batch_size must be >= 1");
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(Rng::derive(seed, static_cast<uint64_t>(epoch)));
  rng.shuffle(perm);
  std::vector<std::vector<int64_t>> out;
  for (int64_t start = 0; start < n; start += batch_size) {
    int64_t stop = std::min(n, start + batch_size);
    out.emplace_back(perm.begin() + start, perm.begin() + stop);
  }
  return out;
}

Matrix gather_rows(const Matrix& features, const std::vector<int64_t>& idx) {
  return features.select_rows(idx);
}

BatchStream::BatchStream(const Dataset& data, int64_t batch_size, uint64_t seed)
    : data_(data), batch_size_(batch_size), seed_(seed) {
  if (data.train_idx.empty()) throw ValidationError("BatchStream: dataset has no train split");
  if (batch_size < 1) throw ValidationError("BatchStream: batch_size must be >= 1");
  refill();
}

void BatchStream::refill() {
  queue_ = batches(static_cast<int64_t>(data_.train_idx.size()), batch_size_, seed_, epoch_);
  cursor_ = 0;
}

void BatchStream::next(Matrix& x, std::vector<int64_t>& y) {
  if (cursor_ == queue_.size()) {
    ++epoch_;
    refill();
  }
  const auto& slice = queue_[cursor_++];
  std::vector<int64_t> rows;
  rows.reserve(slice.size());
  for (int64_t local : slice) rows.push_back(data_.train_idx[static_cast<size_t>(local)]);
  x = gather_rows(data_.features, rows);
  y = gather_labels(data_.labels, rows);
}

std::vector<int64_t> gather_labels(const std::vector<int64_t>& labels,
                                   const std::vector<int64_t>& idx) {
  std::vector<int64_t> out;
  out.reserve(idx.size());
  for (int64_t i : idx) {
    if (i < 0 || i >= static_cast<int64_t>(labels.size())) {
      throw ValidationError("gather_labels: index " + std::to_string(i) + " out of range");
    }
    out.push_back(labels[static_cast<size_t>(i)]);
  }
  return out;
}

}  // namespace sllb
