#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sllb/dataset.hpp"
#include "sllb/landscape.hpp"
#include "sllb/mask.hpp"
#include "sllb/network.hpp"

namespace sllb {

// Bezier curve B_n(t) = sum_i C(n,i) (1-t)^(n-i) t^i theta_i between two
// fixed endpoints theta_0 and theta_n, optionally confined to a sparse
// subspace (every control point satisfies the constraint mask).
struct BezierPath {
  int order = 2;  // n in {2, 3}
  std::vector<ParamVector> control_points;  // n + 1 of them
  std::optional<SparsityMask> constraint;

  void validate() const;
};

struct PathOptConfig {
  int64_t steps = 2000;
  int64_t batch_size = 128;
  double base_lr = 0.01;
  double momentum = 0.95;
  double weight_decay = 1e-4;
  uint64_t seed = 1;

  void validate() const;
};

// Bernstein basis coefficient C(n,i) (1-t)^(n-i) t^i.
double bernstein(int n, int i, double t);

// Interior control points placed at the straight-line positions, so the
// initial curve coincides with the linear segment.
BezierPath make_linear_path(const ParamVector& theta_0, const ParamVector& theta_n, int order,
                            std::optional<SparsityMask> constraint = std::nullopt);

// Point on the curve; bitwise theta_0 at t=0 and theta_n at t=1.
ParamVector bezier_point(const BezierPath& path, double t);

// dL(B(t))/d theta_i = bernstein(n,i,t) * grad L at B(t), for interior i.
// Masked when the path is constrained. Returns n-1 vectors (i = 1..n-1).
std::vector<ParamVector> path_grad(const Network& net, const BezierPath& path, double t,
                                   const Matrix& inputs, const std::vector<int64_t>& labels,
                                   double weight_decay, LossBreakdown* loss_out = nullptr);

struct PathTraceRow {
  int64_t step = 0;
  double t = 0.0;       // sampled curve position
  LossBreakdown loss;   // minibatch loss at B(t), pre-update
};

// Stochastic minimization of the expected loss along the curve: each step
// samples one t ~ U(0,1) and one train batch, then updates interior points by
// SGD with momentum on path_grad. Endpoints never move. steps = 0 returns the
// straight-line path untouched.
std::pair<BezierPath, std::vector<PathTraceRow>> optimize_path(
    const Network& net, const ParamVector& theta_0, const ParamVector& theta_n, int order,
    std::optional<SparsityMask> constraint, const PathOptConfig& config, const Dataset& data);

// Loss profile along the curve over t_grid (subset of [0,1]); same evaluation
// conventions as profile_line.
LossProfile profile_path(const BezierPath& path, const std::vector<double>& t_grid,
                         const Evaluator& eval, int64_t threads = 1);

}  // namespace sllb
