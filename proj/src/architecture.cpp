#include "sllb/architecture.hpp"

#include <string>

namespace sllb {

bool Architecture::has_batchnorm() const {
  for (uint8_t b : use_batchnorm) {
    if (b) return true;
  }
  return false;
}

void Architecture::validate() const {
  std::string problems;
  if (layer_sizes.size() < 2) {
    problems += "layer_sizes must have at least 2 entries; ";
  }
  for (size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] < 1) {
      problems += "layer_sizes[" + std::to_string(i) + "] must be >= 1; ";
    }
  }
  if (!use_batchnorm.empty() &&
      use_batchnorm.size() != static_cast<size_t>(n_hidden())) {
    problems += "use_batchnorm must have one flag per hidden layer; ";
  }
  if (!problems.empty()) {
    throw ValidationError("Architecture: " + problems);
  }
}

LayoutPtr make_layout(const Architecture& arch) {
  arch.validate();
  std::vector<SegmentDesc> segs;
  int64_t off = 0;
  auto push = [&](int32_t layer, SegmentKind kind, std::vector<int64_t> shape) {
    SegmentDesc d;
    d.layer = layer;
    d.kind = kind;
    d.offset = off;
    d.shape = std::move(shape);
    off += d.len();
    segs.push_back(std::move(d));
  };
  for (int l = 0; l < arch.n_linear(); ++l) {
    const int64_t fan_in = arch.layer_sizes[static_cast<size_t>(l)];
    const int64_t fan_out = arch.layer_sizes[static_cast<size_t>(l) + 1];
    push(l, SegmentKind::Weight, {fan_in, fan_out});
    push(l, SegmentKind::Bias, {fan_out});
    if (l < arch.n_hidden() && arch.batchnorm_at(l)) {
      push(l, SegmentKind::BnGamma, {fan_out});
      push(l, SegmentKind::BnBeta, {fan_out});
    }
  }
  return std::make_shared<Layout>(std::move(segs));
}

}  // namespace sllb
