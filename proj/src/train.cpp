#include "sllb/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "sllb/error.hpp"
#include "sllb/rng.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

constexpr uint64_t kZeroPickStream = 0x7a65726f70ull;  // "zerop"

void check_finite(const LossBreakdown& loss, int64_t step) {
  if (!std::isfinite(loss.total)) {
    throw RuntimeError("training diverged at step " + std::to_string(step) + ": loss " +
                       format_f64(loss.total));
  }
}

}  // namespace

void TrainConfig::validate() const {
  std::string problems;
  auto add = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (total_steps < 1) add("total_steps must be >= 1");
  if (batch_size < 1) add("batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) add("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) add("weight_decay must be >= 0");
  if (eval_every < 1) add("eval_every must be >= 1");
  try {
    lr.validate();
  } catch (const ValidationError& e) {
    add(e.what());
  }
  if (!problems.empty()) throw ValidationError("TrainConfig: " + problems);
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Dense: return "dense";
    case Provenance::Pruned: return "pruned";
    case Provenance::Lottery: return "lottery";
    case Provenance::Scratch: return "scratch";
    case Provenance::SparseInit: return "sparse_init";
  }
  throw ValidationError("invalid provenance value");
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "dense") return Provenance::Dense;
  if (name == "pruned") return Provenance::Pruned;
  if (name == "lottery") return Provenance::Lottery;
  if (name == "scratch") return Provenance::Scratch;
  if (name == "sparse_init") return Provenance::SparseInit;
  throw ValidationError("unknown provenance \"" + name + "\"");
}

double Solution::final_eval_accuracy() const {
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (!std::isnan(it->eval_accuracy)) return it->eval_accuracy;
  }
  throw RuntimeError("Solution has no evaluated history row");
}

double eval_accuracy(const Network& net, const ParamVector& params, const Dataset& data,
                     const BnState& bn) {
  if (data.test_idx.empty()) throw ValidationError("eval_accuracy: dataset has no test split");
  Matrix x = gather_rows(data.features, data.test_idx);
  std::vector<int64_t> y = gather_labels(data.labels, data.test_idx);
  BnState state = bn;  // eval never mutates caller state
  Matrix logits = net.forward(params, x, Mode::Eval, state.mean.empty() ? nullptr : &state);
  int64_t hits = 0;
  softmax_cross_entropy(logits, y, nullptr, &hits);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

namespace {

// Shared SGD loop. mask, when present, is applied to gradient, velocity and
// params each step; prune_events drives mask replacement for prune_train.
struct PruneDriver {
  const PruningSchedule* sched = nullptr;
  PruneExclusions exclusions;
  MaskScope scope = MaskScope::PerLayer;
  bool monotone = true;
};

Solution run_sgd(const Network& net, const TrainConfig& config, const ParamVector& init,
                 std::optional<SparsityMask> mask, const Dataset& data, Provenance provenance,
                 const PruneDriver* prune, ParamVector* velocity_out) {
  config.validate();
  if (init.layout() != *net.layout()) {
    throw ValidationError("train: init layout does not match network layout");
  }
  if (mask && !mask->same_layout(init)) {
    throw ValidationError("train: mask layout does not match init layout");
  }

  // Events past the final step never fire; a window entirely beyond
  // total_steps leaves the run dense.
  std::vector<int64_t> events;
  size_t next_event = 0;
  if (prune) events = prune_event_steps(*prune->sched);

  ParamVector params = init;
  if (mask) apply_mask_in_place(params, *mask);
  ParamVector velocity(net.layout());
  BnState bn = make_bn_state(net.arch());
  ParamVector grad(net.layout());
  BatchStream stream(data, config.batch_size, config.seed);

  Solution sol;
  sol.provenance = provenance;
  sol.history.reserve(static_cast<size_t>(config.total_steps));

  Matrix x;
  std::vector<int64_t> y;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int64_t step = 0; step < config.total_steps; ++step) {
    if (prune && next_event < events.size() && step == events[next_event]) {
      double target = target_sparsity(*prune->sched, step);
      SparsityMask fresh =
          magnitude_mask(params, target, prune->exclusions, prune->scope);
      mask = (mask && prune->monotone) ? mask_and(*mask, fresh) : fresh;
      apply_mask_in_place(params, *mask);
      apply_mask_in_place(velocity, *mask);
      ++next_event;
    }

    stream.next(x, y);
    LossBreakdown loss = net.loss_grad(params, x, y, config.weight_decay, Mode::Train, grad,
                                       bn.mean.empty() ? nullptr : &bn, config.l2_scope);
    check_finite(loss, step);
    if (mask) apply_mask_in_place(grad, *mask);

    double lr = lr_at(config.lr, step);
    auto& v = velocity.values();
    auto& p = params.values();
    const auto& g = grad.values();
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = config.momentum * v[i] + g[i];
      p[i] -= lr * v[i];
    }
    if (mask) {
      apply_mask_in_place(params, *mask);
      apply_mask_in_place(velocity, *mask);
    }

    HistoryRow row;
    row.step = step;
    row.train = loss;
    bool eval_now = (step % config.eval_every == 0) || step == config.total_steps - 1;
    row.eval_accuracy = eval_now ? eval_accuracy(net, params, data, bn) : nan;
    sol.history.push_back(row);
  }

  sol.params = std::move(params);
  sol.mask = std::move(mask);
  sol.bn = std::move(bn);
  if (velocity_out) *velocity_out = std::move(velocity);
  return sol;
}

}  // namespace

Solution train(const Network& net, const TrainConfig& config, const ParamVector& init,
               const std::optional<SparsityMask>& mask, const Dataset& data,
               Provenance provenance, ParamVector* velocity_out) {
  return run_sgd(net, config, init, mask, data, provenance, nullptr, velocity_out);
}

Solution prune_train(const Network& net, const TrainConfig& config, const PruningSchedule& sched,
                     const ParamVector& init, const Dataset& data,
                     const PruneExclusions& exclusions, MaskScope mask_scope, bool monotone) {
  sched.validate();
  PruneDriver driver{&sched, exclusions, mask_scope, monotone};
  return run_sgd(net, config, init, std::nullopt, data, Provenance::Pruned, &driver, nullptr);
}

std::pair<ParamVector, SparsityMask> lottery_init(const Solution& pruned,
                                                  const ParamVector& original_init) {
  if (!pruned.mask) {
    throw ValidationError("lottery_init: pruned solution carries no mask");
  }
  return {apply_mask(original_init, *pruned.mask), *pruned.mask};
}

ParamVector scratch_init(const Architecture& arch, uint64_t seed, const SparsityMask& mask) {
  ParamVector fresh = init_params(arch, Rng::derive(seed, 0x73637261746368ull));
  apply_mask_in_place(fresh, mask);
  return fresh;
}

std::vector<SparseInitRun> sparse_init_sweep(const Network& net, const TrainConfig& config,
                                             const std::vector<double>& zero_fractions,
                                             const Dataset& data,
                                             const PruneExclusions& exclusions) {
  for (double f : zero_fractions) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw ValidationError("sparse_init_sweep: zero fraction must lie in [0, 1), got " +
                            format_f64(f));
    }
  }
  std::vector<SparseInitRun> out;
  out.reserve(zero_fractions.size());
  const auto prunable = prunable_segments(*net.layout(), exclusions);
  for (double f : zero_fractions) {
    ParamVector init = init_params(net.arch(), config.seed);
    if (f > 0.0) {
      // selection seeded by the fraction's bit pattern: stable under list reordering
      uint64_t fbits;
      static_assert(sizeof(fbits) == sizeof(f));
      std::memcpy(&fbits, &f, sizeof(fbits));
      Rng rng(Rng::derive(config.seed, kZeroPickStream ^ fbits));
      for (const SegmentDesc* d : prunable) {
        const double frac = capped_fraction(d->layer, f, exclusions);
        const auto n_zero = static_cast<size_t>(
            std::floor(frac * static_cast<double>(d->len())));
        if (n_zero == 0) continue;
        std::vector<size_t> picks(static_cast<size_t>(d->len()));
        std::iota(picks.begin(), picks.end(), static_cast<size_t>(d->offset));
        rng.shuffle(picks);
        for (size_t k = 0; k < n_zero; ++k) init.values()[picks[k]] = 0.0;
      }
    }
    SparseInitRun run;
    run.zero_fraction = f;
    run.solution = train(net, config, init, std::nullopt, data, Provenance::SparseInit);
    run.final_accuracy = run.solution.final_eval_accuracy();
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace sllb
