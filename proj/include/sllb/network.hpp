#pragma once

#include <cstdint>
#include <vector>

#include "sllb/architecture.hpp"
#include "sllb/matrix.hpp"
#include "sllb/param_vector.hpp"

namespace sllb {

enum class Mode { Train, Eval };
enum class L2Scope { WeightsOnly, All };
enum class InitScheme { HeNormal };

inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.9;

// total = cross_entropy + l2_term; accuracy is the argmax hit rate over the batch.
struct LossBreakdown {
  double total = 0.0;
  double cross_entropy = 0.0;
  double l2_term = 0.0;
  double accuracy = 0.0;
};

// Caller-owned running statistics for batch-norm layers, used in eval mode
// and updated by train-mode forward passes when passed in.
struct BnState {
  std::vector<std::vector<double>> mean, var;  // indexed by hidden layer
};

BnState make_bn_state(const Architecture& arch);

// Mean softmax cross-entropy over the batch. Fills dlogits with
// d(mean ce)/dlogits when non-null; counts argmax hits (first index wins
// ties) into *correct when non-null. Throws on out-of-range labels.
double softmax_cross_entropy(const Matrix& logits, const std::vector<int64_t>& labels,
                             Matrix* dlogits, int64_t* correct);

// Feed-forward network over a flat parameter vector with exact analytic
// gradients. All operations are pure functions of their inputs; the only
// mutation is into caller-owned outputs (grad, BnState).
class Network {
 public:
  explicit Network(Architecture arch);

  const Architecture& arch() const { return arch_; }
  const LayoutPtr& layout() const { return layout_; }
  size_t param_count() const { return layout_->total_len(); }

  Matrix forward(const ParamVector& params, const Matrix& inputs, Mode mode,
                 BnState* bn = nullptr) const;

  LossBreakdown loss(const ParamVector& params, const Matrix& inputs,
                     const std::vector<int64_t>& labels, double weight_decay, Mode mode,
                     BnState* bn = nullptr, L2Scope scope = L2Scope::WeightsOnly) const;

  LossBreakdown loss_grad(const ParamVector& params, const Matrix& inputs,
                          const std::vector<int64_t>& labels, double weight_decay, Mode mode,
                          ParamVector& grad, BnState* bn = nullptr,
                          L2Scope scope = L2Scope::WeightsOnly) const;

 private:
  Architecture arch_;
  LayoutPtr layout_;
};

// 0.5 * sum of squares over the segments selected by scope.
double l2_half_sum(const ParamVector& params, L2Scope scope);

// He-normal init: weights N(0, 2/fan_in), biases 0, bn_gamma 1, bn_beta 0.
// Deterministic given seed.
ParamVector init_params(const Architecture& arch, uint64_t seed,
                        InitScheme scheme = InitScheme::HeNormal);

}  // namespace sllb
