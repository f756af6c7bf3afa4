#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sllb/error.hpp"

namespace sllb {

enum class SegmentKind : uint8_t { Weight = 0, Bias = 1, BnGamma = 2, BnBeta = 3 };

const char* segment_kind_name(SegmentKind k);

struct SegmentDesc {
  int32_t layer = 0;
  SegmentKind kind = SegmentKind::Weight;
  int64_t offset = 0;
  std::vector<int64_t> shape;

  int64_t len() const {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }
  bool operator==(const SegmentDesc&) const = default;
};

// Ordered segment table mapping (layer, kind, shape) into a flat vector.
class Layout {
 public:
  explicit Layout(std::vector<SegmentDesc> segments);

  const std::vector<SegmentDesc>& segments() const { return segments_; }
  int64_t total_len() const { return total_len_; }
  const SegmentDesc* find(int32_t layer, SegmentKind kind) const;
  bool operator==(const Layout& other) const { return segments_ == other.segments_; }

 private:
  std::vector<SegmentDesc> segments_;
  int64_t total_len_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

// Flat f64 vector of all trainable parameters plus its layout.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(LayoutPtr layout);
  ParamVector(LayoutPtr layout, std::vector<double> values);

  size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](size_t i) const { return values_[i]; }
  double& operator[](size_t i) { return values_[i]; }

  const Layout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  std::span<double> segment(const SegmentDesc& d) {
    return {values_.data() + d.offset, static_cast<size_t>(d.len())};
  }
  std::span<const double> segment(const SegmentDesc& d) const {
    return {values_.data() + d.offset, static_cast<size_t>(d.len())};
  }

  bool same_layout(const ParamVector& other) const;

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

void check_same_layout(const ParamVector& a, const ParamVector& b);

// In-place arithmetic; every entry point checks layout compatibility.
void add_scaled(ParamVector& a, double s, const ParamVector& b);  // a += s*b
void scale(ParamVector& a, double s);
void fill(ParamVector& a, double v);

}  // namespace sllb
