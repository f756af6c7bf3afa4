#include "sllb/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sllb/error.hpp"

namespace sllb {

namespace {

bool is_prunable(const SegmentDesc& d) { return d.kind == SegmentKind::Weight; }

}  // namespace

// Weight segments eligible for pruning under the exclusion rules. The first
// weight layer can be skipped entirely; caps are applied at selection time.
std::vector<const SegmentDesc*> prunable_segments(const Layout& layout,
                                                  const PruneExclusions& ex) {
  std::vector<const SegmentDesc*> out;
  for (const auto& d : layout.segments()) {
    if (!is_prunable(d)) continue;
    if (ex.skip_first_layer && d.layer == 0) continue;
    out.push_back(&d);
  }
  return out;
}

double capped_fraction(int32_t layer, double want, const PruneExclusions& ex) {
  auto it = ex.layer_caps.find(layer);
  if (it == ex.layer_caps.end()) return want;
  return std::min(want, it->second);
}

namespace {

void check_fraction(double s) {
  if (!(s >= 0.0 && s < 1.0)) {
    throw ValidationError("sparsity fraction must lie in [0, 1), got " + std::to_string(s));
  }
}

// Indices of the n_zero smallest-magnitude entries among `candidates`
// (global index space). Stable sort keeps the lowest-index-first tie rule.
void zero_smallest(const std::vector<double>& values, std::vector<size_t>& candidates,
                   size_t n_zero, std::vector<uint8_t>& bits) {
  if (n_zero == 0) return;
  std::stable_sort(candidates.begin(), candidates.end(), [&](size_t a, size_t b) {
    return std::fabs(values[a]) < std::fabs(values[b]);
  });
  for (size_t k = 0; k < n_zero && k < candidates.size(); ++k) bits[candidates[k]] = 0;
}

}  // namespace

SparsityMask::SparsityMask(LayoutPtr layout, std::vector<uint8_t> bits)
    : layout_(std::move(layout)), bits_(std::move(bits)) {
  if (!layout_) throw ValidationError("SparsityMask: null layout");
  if (bits_.size() != static_cast<size_t>(layout_->total_len())) {
    throw ValidationError("SparsityMask: bit count " + std::to_string(bits_.size()) +
                          " does not match layout length " +
                          std::to_string(layout_->total_len()));
  }
  for (uint8_t b : bits_) {
    if (b != 0 && b != 1) throw ValidationError("SparsityMask: bits must be 0 or 1");
  }
}

SparsityMask SparsityMask::all_ones(LayoutPtr layout) {
  if (!layout) throw ValidationError("SparsityMask: null layout");
  std::vector<uint8_t> bits(static_cast<size_t>(layout->total_len()), 1);
  return SparsityMask(std::move(layout), std::move(bits));
}

bool SparsityMask::same_layout(const ParamVector& params) const {
  if (!layout_) return false;
  return layout_.get() == &params.layout() || *layout_ == params.layout();
}

bool SparsityMask::same_layout(const SparsityMask& other) const {
  if (!layout_ || !other.layout_) return false;
  return layout_ == other.layout_ || *layout_ == *other.layout_;
}

std::vector<double> SparsityMask::per_layer_sparsity() const {
  std::vector<double> out;
  for (const auto& d : layout_->segments()) {
    if (!is_prunable(d)) continue;
    int64_t zeros = 0;
    for (int64_t i = 0; i < d.len(); ++i) zeros += bits_[static_cast<size_t>(d.offset + i)] == 0;
    out.push_back(static_cast<double>(zeros) / static_cast<double>(d.len()));
  }
  return out;
}

SparsityMask magnitude_mask(const ParamVector& params, double sparsity,
                            const PruneExclusions& exclusions, MaskScope scope) {
  check_fraction(sparsity);
  const Layout& layout = params.layout();
  std::vector<uint8_t> bits(static_cast<size_t>(layout.total_len()), 1);
  auto prunable = prunable_segments(layout, exclusions);

  if (scope == MaskScope::PerLayer) {
    for (const SegmentDesc* d : prunable) {
      double frac = capped_fraction(d->layer, sparsity, exclusions);
      auto n_zero = static_cast<size_t>(std::floor(frac * static_cast<double>(d->len())));
      std::vector<size_t> idx(static_cast<size_t>(d->len()));
      std::iota(idx.begin(), idx.end(), static_cast<size_t>(d->offset));
      zero_smallest(params.values(), idx, n_zero, bits);
    }
    return SparsityMask(params.layout_ptr(), std::move(bits));
  }

  // Global scope: one pool across all prunable segments; capped layers are
  // pruned separately at their cap and removed from the pool.
  std::vector<size_t> pool;
  int64_t pool_len = 0;
  for (const SegmentDesc* d : prunable) {
    if (exclusions.layer_caps.count(d->layer)) {
      double frac = capped_fraction(d->layer, sparsity, exclusions);
      auto n_zero = static_cast<size_t>(std::floor(frac * static_cast<double>(d->len())));
      std::vector<size_t> idx(static_cast<size_t>(d->len()));
      std::iota(idx.begin(), idx.end(), static_cast<size_t>(d->offset));
      zero_smallest(params.values(), idx, n_zero, bits);
      continue;
    }
    for (int64_t i = 0; i < d->len(); ++i) pool.push_back(static_cast<size_t>(d->offset + i));
    pool_len += d->len();
  }
  auto n_zero = static_cast<size_t>(std::floor(sparsity * static_cast<double>(pool_len)));
  zero_smallest(params.values(), pool, n_zero, bits);
  return SparsityMask(params.layout_ptr(), std::move(bits));
}

SparsityMask magnitude_mask(const ParamVector& params, const std::vector<double>& per_layer,
                            const PruneExclusions& exclusions) {
  const Layout& layout = params.layout();
  auto prunable = prunable_segments(layout, exclusions);
  if (per_layer.size() != prunable.size()) {
    throw ValidationError("magnitude_mask: got " + std::to_string(per_layer.size()) +
                          " per-layer fractions for " + std::to_string(prunable.size()) +
                          " prunable weight segments");
  }
  std::vector<uint8_t> bits(static_cast<size_t>(layout.total_len()), 1);
  for (size_t k = 0; k < prunable.size(); ++k) {
    const SegmentDesc* d = prunable[k];
    check_fraction(per_layer[k]);
    double frac = capped_fraction(d->layer, per_layer[k], exclusions);
    auto n_zero = static_cast<size_t>(std::floor(frac * static_cast<double>(d->len())));
    std::vector<size_t> idx(static_cast<size_t>(d->len()));
    std::iota(idx.begin(), idx.end(), static_cast<size_t>(d->offset));
    zero_smallest(params.values(), idx, n_zero, bits);
  }
  return SparsityMask(params.layout_ptr(), std::move(bits));
}

ParamVector apply_mask(const ParamVector& params, const SparsityMask& mask) {
  ParamVector out = params;
  apply_mask_in_place(out, mask);
  return out;
}

void apply_mask_in_place(ParamVector& params, const SparsityMask& mask) {
  if (!mask.same_layout(params)) {
    throw ValidationError("apply_mask: mask layout does not match parameter layout");
  }
  auto& v = params.values();
  const auto& bits = mask.bits();
  // select, not multiply: masked slots become exactly 0.0 even from NaN/inf
  for (size_t i = 0; i < v.size(); ++i) v[i] = bits[i] ? v[i] : 0.0;
}

double mask_sparsity(const SparsityMask& mask, SparsityScope scope) {
  const auto& bits = mask.bits();
  if (scope == SparsityScope::Global) {
    if (bits.empty()) throw ValidationError("mask_sparsity: empty mask");
    int64_t zeros = 0;
    for (uint8_t b : bits) zeros += b == 0;
    return static_cast<double>(zeros) / static_cast<double>(bits.size());
  }
  int64_t zeros = 0, total = 0;
  for (const auto& d : mask.layout().segments()) {
    if (d.kind != SegmentKind::Weight) continue;
    for (int64_t i = 0; i < d.len(); ++i) zeros += bits[static_cast<size_t>(d.offset + i)] == 0;
    total += d.len();
  }
  if (total == 0) throw ValidationError("mask_sparsity: layout has no weight segments");
  return static_cast<double>(zeros) / static_cast<double>(total);
}

SparsityMask mask_and(const SparsityMask& a, const SparsityMask& b) {
  if (!a.same_layout(b)) throw ValidationError("mask_and: layouts differ");
  std::vector<uint8_t> bits(a.size());
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = a.bits()[i] & b.bits()[i];
  return SparsityMask(a.layout_ptr(), std::move(bits));
}

}  // namespace sllb
