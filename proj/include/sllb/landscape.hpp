#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sllb/dataset.hpp"
#include "sllb/network.hpp"

namespace sllb {

struct ProfilePoint {
  double t = 0.0;
  LossBreakdown loss;
};

struct LossProfile {
  std::vector<ProfilePoint> points;  // t strictly increasing
  std::string endpoint_s, endpoint_e;  // provenance labels
  uint64_t dataset_id = 0;
  std::string eval_note;
};

struct MonotonicityScore {
  int64_t num_increases = 0;
  double max_increase = 0.0;
  double violation_mass = 0.0;
  bool degenerate_denominator = false;  // first - last <= 0 over the range
};

// Evenly spaced grid from lo to hi, endpoints included. Built on an integer
// micro-unit lattice so grid values like 0 and 1 are exact doubles.
std::vector<double> make_grid(double lo, double hi, double step);
std::vector<double> default_grid();  // [-0.2, 1.2] step 0.01, 141 points

// theta(t) = t*theta_e + (1-t)*theta_s; exact endpoints at t=0 and t=1.
ParamVector interpolate(const ParamVector& theta_s, const ParamVector& theta_e, double t);

// Full-dataset loss evaluation with a fixed seeded batch partition.
// Batch-norm nets run in train mode (batch statistics) without touching any
// running state; cross-entropy accumulates with compensated summation so the
// result is independent of the partition for batchnorm-free nets.
class Evaluator {
 public:
  Evaluator(const Network& net, Matrix features, std::vector<int64_t> labels,
            double weight_decay, int64_t batch_size, uint64_t seed,
            L2Scope scope = L2Scope::WeightsOnly);

  // Convenience: evaluates over the train split of a dataset.
  Evaluator(const Network& net, const Dataset& data, double weight_decay, int64_t batch_size,
            uint64_t seed, L2Scope scope = L2Scope::WeightsOnly);

  LossBreakdown eval(const ParamVector& params) const;
  int64_t example_count() const { return features_.rows(); }
  uint64_t dataset_id = 0;

 private:
  const Network& net_;
  Matrix features_;
  std::vector<int64_t> labels_;
  double weight_decay_;
  L2Scope scope_;
  std::vector<std::vector<int64_t>> partition_;
};

// Loss profile along the straight segment between theta_s and theta_e,
// one evaluation per grid point. Points at distinct t are evaluated
// concurrently when `threads` > 1 (order in the result is by t regardless).
LossProfile profile_line(const ParamVector& theta_s, const ParamVector& theta_e,
                         const std::vector<double>& t_grid, const Evaluator& eval,
                         int64_t threads = 1);

// Counts consecutive increases of total loss over t in [t_lo, t_hi]:
// (number of increases, largest single increase, sum of increases divided by
// first-minus-last total). Degenerate descent (<= 0) reports mass 0 + flag.
MonotonicityScore monotonicity_score(const LossProfile& profile, double t_lo, double t_hi);

// Max over t in [0,1] of total loss minus the larger endpoint total; <= 0
// means no barrier. Requires grid points at t=0 and t=1.
double barrier_height(const LossProfile& profile);

}  // namespace sllb
