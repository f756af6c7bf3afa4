#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sllb/param_vector.hpp"

namespace sllb {

// Layer rules applied when building masks: an optional first-layer skip and
// per-layer sparsity ceilings (layer index -> max fraction).
struct PruneExclusions {
  bool skip_first_layer = false;
  std::map<int32_t, double> layer_caps;
};

enum class MaskScope { PerLayer, Global };
enum class SparsityScope { Global, PrunableOnly };

// Binary vector aligned to a ParamVector layout. Bits over bias/BN segments
// are always 1; only weight segments are prunable.
class SparsityMask {
 public:
  SparsityMask() = default;
  SparsityMask(LayoutPtr layout, std::vector<uint8_t> bits);

  static SparsityMask all_ones(LayoutPtr layout);

  const std::vector<uint8_t>& bits() const { return bits_; }
  size_t size() const { return bits_.size(); }
  const Layout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  bool same_layout(const ParamVector& params) const;
  bool same_layout(const SparsityMask& other) const;

  // Zero fraction per weight segment, in layout order.
  std::vector<double> per_layer_sparsity() const;

 private:
  LayoutPtr layout_;
  std::vector<uint8_t> bits_;
};

// The weight segments a mask may zero under the given exclusions, in layout
// order, and the per-layer fraction after applying any cap. Shared by mask
// construction and the random-zeroing sweep so both count sparsity the same
// way.
std::vector<const SegmentDesc*> prunable_segments(const Layout& layout,
                                                  const PruneExclusions& exclusions);
double capped_fraction(int32_t layer, double want, const PruneExclusions& exclusions);

// Magnitude pruning: within each prunable weight segment the floor(s*len)
// smallest-|w| entries get bit 0; ties prune the lowest index first.
SparsityMask magnitude_mask(const ParamVector& params, double sparsity,
                            const PruneExclusions& exclusions = {},
                            MaskScope scope = MaskScope::PerLayer);

// Per-layer targets, one fraction per weight segment in layout order.
SparsityMask magnitude_mask(const ParamVector& params, const std::vector<double>& per_layer,
                            const PruneExclusions& exclusions = {});

// Entry-wise product; masked entries end up exactly 0.0.
ParamVector apply_mask(const ParamVector& params, const SparsityMask& mask);
void apply_mask_in_place(ParamVector& params, const SparsityMask& mask);

double mask_sparsity(const SparsityMask& mask, SparsityScope scope);

// Intersection of kept sets: a bit survives only if set in both.
SparsityMask mask_and(const SparsityMask& a, const SparsityMask& b);

}  // namespace sllb
