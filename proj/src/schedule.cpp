#include "sllb/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sllb/error.hpp"

namespace sllb {

void LrSchedule::validate() const {
  if (!(base_lr > 0.0)) throw ValidationError("LrSchedule: base_lr must be positive");
  if (warmup_steps < 0) throw ValidationError("LrSchedule: warmup_steps must be >= 0");
  if (!(drop_factor > 0.0 && drop_factor < 1.0)) {
    throw ValidationError("LrSchedule: drop_factor must lie in (0, 1)");
  }
  for (size_t i = 1; i < drop_steps.size(); ++i) {
    if (drop_steps[i] <= drop_steps[i - 1]) {
      throw ValidationError("LrSchedule: drop_steps must be strictly increasing");
    }
  }
}

double lr_at(const LrSchedule& sched, int64_t step) {
  if (step < 0) throw ValidationError("lr_at: step must be >= 0");
  double lr = sched.base_lr;
  if (step < sched.warmup_steps) {
    return lr * static_cast<double>(step) / static_cast<double>(sched.warmup_steps);
  }
  for (int64_t d : sched.drop_steps) {
    if (d <= step) lr *= sched.drop_factor;
  }
  return lr;
}

void PruningSchedule::validate() const {
  if (start_step < 0) throw ValidationError("PruningSchedule: start_step must be >= 0");
  if (end_step <= start_step) {
    throw ValidationError("PruningSchedule: end_step must be > start_step");
  }
  if (frequency < 1) throw ValidationError("PruningSchedule: frequency must be >= 1");
  auto frac = [](double s, const char* name) {
    if (!(s >= 0.0 && s < 1.0)) {
      throw ValidationError(std::string("PruningSchedule: ") + name + " must lie in [0, 1)");
    }
  };
  frac(initial_sparsity, "initial_sparsity");
  frac(final_sparsity, "final_sparsity");
  if (final_sparsity < initial_sparsity) {
    throw ValidationError("PruningSchedule: final_sparsity must be >= initial_sparsity");
  }
  if (!(exponent > 0.0)) throw ValidationError("PruningSchedule: exponent must be positive");
}

double target_sparsity(const PruningSchedule& sched, int64_t step) {
  if (step < sched.start_step) return 0.0;
  if (step >= sched.end_step) return sched.final_sparsity;
  double span = static_cast<double>(sched.end_step - sched.start_step);
  double progress = static_cast<double>(step - sched.start_step) / span;
  return sched.final_sparsity +
         (sched.initial_sparsity - sched.final_sparsity) *
             std::pow(1.0 - progress, sched.exponent);
}

std::vector<int64_t> prune_event_steps(const PruningSchedule& sched) {
  std::vector<int64_t> steps;
  for (int64_t s = sched.start_step; s <= sched.end_step; s += sched.frequency) {
    steps.push_back(s);
  }
  if (steps.empty() || steps.back() != sched.end_step) steps.push_back(sched.end_step);
  return steps;
}

}  // namespace sllb
