#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sllb/dataset.hpp"
#include "sllb/mask.hpp"
#include "sllb/network.hpp"
#include "sllb/schedule.hpp"

namespace sllb {

struct TrainConfig {
  int64_t total_steps = 3000;
  int64_t batch_size = 128;
  LrSchedule lr{0.1, 100, {1800, 2550, 2850}, 0.1};
  double momentum = 0.9;
  double weight_decay = 1e-4;
  uint64_t seed = 1;
  int64_t eval_every = 100;  // test accuracy cadence in history (final step always)
  L2Scope l2_scope = L2Scope::WeightsOnly;

  void validate() const;
};

// One history row per step: minibatch train loss at the pre-update point;
// eval_accuracy is the test-split accuracy when evaluated that step, NaN otherwise.
struct HistoryRow {
  int64_t step = 0;
  LossBreakdown train;
  double eval_accuracy = 0.0;
};

enum class Provenance { Dense, Pruned, Lottery, Scratch, SparseInit };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct Solution {
  ParamVector params;
  std::optional<SparsityMask> mask;
  std::vector<HistoryRow> history;
  Provenance provenance = Provenance::Dense;
  BnState bn;  // running stats at the end of training (empty without batchnorm)

  double final_eval_accuracy() const;
};

// SGD with momentum (v <- mu*v + g; theta <- theta - lr*v). With a mask, both
// the gradient and the updated parameters are masked every step, so masked
// coordinates and their momentum stay exactly 0. Deterministic given config.seed.
// velocity_out, when non-null, receives the final momentum buffer.
Solution train(const Network& net, const TrainConfig& config, const ParamVector& init,
               const std::optional<SparsityMask>& mask, const Dataset& data,
               Provenance provenance = Provenance::Dense, ParamVector* velocity_out = nullptr);

// Dense training with gradual magnitude pruning: at each event step the mask
// is recomputed from current magnitudes at target_sparsity(step); between
// events training proceeds masked. With monotone=true (default) each new mask
// is intersected with the previous one so pruned coordinates never regrow.
// Events land on start, start+freq, ..., end (end always included) when those
// steps are reached; a schedule starting at or after total_steps degrades to
// dense training.
Solution prune_train(const Network& net, const TrainConfig& config, const PruningSchedule& sched,
                     const ParamVector& init, const Dataset& data,
                     const PruneExclusions& exclusions = {},
                     MaskScope mask_scope = MaskScope::PerLayer, bool monotone = true);

// Lottery-ticket restart point: the original initialization under the pruned mask.
std::pair<ParamVector, SparsityMask> lottery_init(const Solution& pruned,
                                                  const ParamVector& original_init);

// From-scratch restart point: a fresh He init drawn on an independent stream
// of `seed` (so it never collides with the dense init), under the given mask.
ParamVector scratch_init(const Architecture& arch, uint64_t seed, const SparsityMask& mask);

struct SparseInitRun {
  double zero_fraction = 0.0;
  double final_accuracy = 0.0;
  Solution solution;
};

// For each fraction: fresh init from config.seed, then within every prunable
// weight segment (same exclusion rules as mask construction) floor(f*len)
// randomly chosen coordinates are set to 0, then dense training (no mask) —
// a random-topology control for the learned masks at matched sparsity.
// Fraction 0 reproduces the dense baseline bitwise.
std::vector<SparseInitRun> sparse_init_sweep(const Network& net, const TrainConfig& config,
                                             const std::vector<double>& zero_fractions,
                                             const Dataset& data,
                                             const PruneExclusions& exclusions = {});

// Test-split accuracy of params (eval mode, running BN stats).
double eval_accuracy(const Network& net, const ParamVector& params, const Dataset& data,
                     const BnState& bn);

}  // namespace sllb
