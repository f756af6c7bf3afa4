#pragma once

#include <cstdint>
#include <vector>

namespace sllb {

// Step-indexed learning rate: linear warmup from 0 to base over `warmup_steps`,
// then multiplied by `drop_factor` once per drop step already reached.
struct LrSchedule {
  double base_lr = 0.1;
  int64_t warmup_steps = 0;
  std::vector<int64_t> drop_steps;  // strictly increasing
  double drop_factor = 0.1;

  void validate() const;
};

double lr_at(const LrSchedule& sched, int64_t step);

// Gradual sparsity ramp: 0 before start_step, cubic (by default) interpolation
// from initial to final sparsity across [start_step, end_step], flat after.
struct PruningSchedule {
  int64_t start_step = 0;
  int64_t end_step = 0;
  int64_t frequency = 1;     // steps between pruning events
  double initial_sparsity = 0.0;
  double final_sparsity = 0.0;
  double exponent = 3.0;

  void validate() const;
};

double target_sparsity(const PruningSchedule& sched, int64_t step);

// Steps at which pruning fires: start, start+f, start+2f, ... capped at end,
// with end itself always included so the final target is reached.
std::vector<int64_t> prune_event_steps(const PruningSchedule& sched);

}  // namespace sllb
