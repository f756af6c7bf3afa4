#include "sllb/param_vector.hpp"

namespace sllb {

const char* segment_kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::Weight: return "weight";
    case SegmentKind::Bias: return "bias";
    case SegmentKind::BnGamma: return "bn_gamma";
    case SegmentKind::BnBeta: return "bn_beta";
  }
  return "?";
}

Layout::Layout(std::vector<SegmentDesc> segments) : segments_(std::move(segments)) {
  int64_t off = 0;
  for (const auto& s : segments_) {
    if (s.offset != off) {
      throw ValidationError("Layout: segment offsets are not contiguous at layer " +
                            std::to_string(s.layer));
    }
    off += s.len();
  }
  total_len_ = off;
}

const SegmentDesc* Layout::find(int32_t layer, SegmentKind kind) const {
  for (const auto& s : segments_) {
    if (s.layer == layer && s.kind == kind) return &s;
  }
  return nullptr;
}

ParamVector::ParamVector(LayoutPtr layout)
    : layout_(std::move(layout)),
      values_(layout_ ? static_cast<size_t>(layout_->total_len()) : 0, 0.0) {}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_ || values_.size() != static_cast<size_t>(layout_->total_len())) {
    throw ValidationError("ParamVector: value count does not match layout length");
  }
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (layout_ == other.layout_) return layout_ != nullptr;
  if (!layout_ || !other.layout_) return false;
  return *layout_ == *other.layout_;
}

void check_same_layout(const ParamVector& a, const ParamVector& b) {
  if (!a.same_layout(b)) {
    throw ValidationError("ParamVector: layout mismatch in arithmetic operation");
  }
}

void add_scaled(ParamVector& a, double s, const ParamVector& b) {
  check_same_layout(a, b);
  double* pa = a.data();
  const double* pb = b.data();
  for (size_t i = 0; i < a.size(); ++i) pa[i] += s * pb[i];
}

void scale(ParamVector& a, double s) {
  for (auto& v : a.values()) v *= s;
}

void fill(ParamVector& a, double v) {
  for (auto& x : a.values()) x = v;
}

}  // namespace sllb
