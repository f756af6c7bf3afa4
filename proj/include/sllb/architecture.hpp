#pragma once

#include <cstdint>
#include <vector>

#include "sllb/param_vector.hpp"

namespace sllb {

enum class Activation : uint8_t { Relu = 0 };

// MLP shape: layer_sizes = [input, hidden..., output]; batch norm is per
// hidden layer, applied between the linear map and the activation.
struct Architecture {
  std::vector<int64_t> layer_sizes;
  std::vector<uint8_t> use_batchnorm;  // per hidden layer; empty means none
  Activation activation = Activation::Relu;

  int n_linear() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int n_hidden() const { return static_cast<int>(layer_sizes.size()) - 2; }
  bool batchnorm_at(int hidden_layer) const {
    return hidden_layer < static_cast<int>(use_batchnorm.size()) &&
           use_batchnorm[static_cast<size_t>(hidden_layer)] != 0;
  }
  bool has_batchnorm() const;
  void validate() const;  // throws ValidationError
};

// Segment order per linear layer l: weight(l), bias(l), then bn_gamma/bn_beta
// when batch norm is enabled on that hidden layer.
LayoutPtr make_layout(const Architecture& arch);

}  // namespace sllb
