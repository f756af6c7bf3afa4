#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sllb/dataset.hpp"
#include "sllb/error.hpp"
#include "sllb/train.hpp"

using namespace sllb;

namespace {

Dataset small_task() { return make_synthetic(SyntheticKind::Blobs, 100, 0.2, 3); }

Architecture small_arch() { return Architecture{{2, 8, 3}, {}, Activation::Relu}; }

TrainConfig quick_config(int64_t steps) {
  TrainConfig c;
  c.total_steps = steps;
  c.batch_size = 32;
  c.lr = LrSchedule{0.05, 0, {}, 0.1};
  c.momentum = 0.9;
  c.weight_decay = 1e-4;
  c.seed = 11;
  c.eval_every = 50;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("lr_at ramps linearly then applies step drops") {
  LrSchedule warm{0.1, 100, {}, 0.1};
  CHECK(lr_at(warm, 0) == 0.0);
  CHECK(lr_at(warm, 50) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(lr_at(warm, 100) == doctest::Approx(0.1).epsilon(1e-15));

  LrSchedule drops{0.1, 0, {100, 200}, 0.1};
  CHECK(lr_at(drops, 50) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(lr_at(drops, 150) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(lr_at(drops, 250) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(lr_at(drops, 100) == doctest::Approx(0.01).epsilon(1e-12));  // drop applies at its step
}

TEST_CASE("one plain SGD step equals the hand-computed update") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);

  TrainConfig config = quick_config(1);
  config.momentum = 0.0;
  config.lr = LrSchedule{0.05, 0, {}, 0.1};

  Solution sol = train(net, config, init, std::nullopt, data);

  // replicate the single batch the run drew
  BatchStream stream(data, config.batch_size, config.seed);
  Matrix x;
  std::vector<int64_t> y;
  stream.next(x, y);
  ParamVector g(net.layout());
  net.loss_grad(init, x, y, config.weight_decay, Mode::Train, g);

  for (size_t i = 0; i < init.size(); ++i) {
    CHECK(sol.params[i] == init[i] - 0.05 * g[i]);
  }
}

TEST_CASE("training is bitwise deterministic in the seed") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig config = quick_config(60);
  Solution a = train(net, config, init, std::nullopt, data);
  Solution b = train(net, config, init, std::nullopt, data);
  CHECK(a.params.values() == b.params.values());
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train.total == b.history[i].train.total);
  }
}

TEST_CASE("masked training conserves zeros in params and momentum") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  SparsityMask mask = magnitude_mask(init, 0.9);
  TrainConfig config = quick_config(120);

  ParamVector velocity;
  Solution sol = train(net, config, init, mask, data, Provenance::Scratch, &velocity);

  for (size_t i = 0; i < sol.params.size(); ++i) {
    if (mask.bits()[i] == 0) {
      CHECK(sol.params[i] == 0.0);
      CHECK(velocity[i] == 0.0);
    }
  }
  ParamVector reapplied = apply_mask(sol.params, mask);
  CHECK(reapplied.values() == sol.params.values());
  CHECK(sol.mask.has_value());
}

TEST_CASE("history records pre-update losses and scheduled evaluations") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig config = quick_config(75);
  config.eval_every = 30;
  Solution sol = train(net, config, init, std::nullopt, data);

  REQUIRE(sol.history.size() == 75);
  for (const auto& row : sol.history) {
    const bool expect_eval = row.step % 30 == 0 || row.step == 74;
    CHECK(std::isnan(row.eval_accuracy) == !expect_eval);
    CHECK(row.train.total ==
          doctest::Approx(row.train.cross_entropy + row.train.l2_term).epsilon(1e-12));
  }
  CHECK(sol.final_eval_accuracy() == sol.history.back().eval_accuracy);
}

TEST_CASE("dense training lowers the training loss on an easy task") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  Solution sol = train(net, quick_config(300), init, std::nullopt, data);
  CHECK(sol.history.back().train.total < sol.history.front().train.total);
}

TEST_CASE("divergence aborts with step and loss diagnostics") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig config = quick_config(200);
  config.lr = LrSchedule{1e18, 0, {}, 0.1};
  try {
    train(net, config, init, std::nullopt, data);
    FAIL("expected divergence");
  } catch (const RuntimeError& e) {
    CHECK(std::string(e.what()).find("diverged at step") != std::string::npos);
  }
}

TEST_CASE("prune_train reaches the scheduled sparsity exactly per layer") {
  Dataset data = small_task();
  Network net(Architecture{{2, 16, 16, 3}, {}, Activation::Relu});
  ParamVector init = init_params(net.arch(), 4);

  TrainConfig config = quick_config(200);
  PruningSchedule sched;
  sched.start_step = 20;
  sched.end_step = 160;
  sched.frequency = 20;
  sched.initial_sparsity = 0.0;
  sched.final_sparsity = 0.75;
  sched.exponent = 3.0;

  Solution sol = prune_train(net, config, sched, init, data);
  REQUIRE(sol.mask.has_value());
  CHECK(sol.provenance == Provenance::Pruned);

  for (const auto& seg : sol.params.layout().segments()) {
    if (seg.kind != SegmentKind::Weight) continue;
    int64_t zeros = 0;
    for (int64_t i = 0; i < seg.len(); ++i) {
      zeros += sol.mask->bits()[static_cast<size_t>(seg.offset + i)] == 0;
    }
    const auto want = static_cast<int64_t>(std::floor(0.75 * static_cast<double>(seg.len())));
    CHECK(std::abs(zeros - want) <= 1);
  }
  ParamVector reapplied = apply_mask(sol.params, *sol.mask);
  CHECK(reapplied.values() == sol.params.values());
}

TEST_CASE("a schedule starting past the final step degrades to dense training") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig config = quick_config(50);

  PruningSchedule sched;
  sched.start_step = 500;
  sched.end_step = 600;
  sched.frequency = 10;
  sched.final_sparsity = 0.9;

  Solution pruned = prune_train(net, config, sched, init, data);
  Solution dense = train(net, config, init, std::nullopt, data);
  CHECK(pruned.params.values() == dense.params.values());
  CHECK(!pruned.mask.has_value());
}

TEST_CASE("lottery_init masks the original initialization") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig config = quick_config(80);
  PruningSchedule sched;
  sched.start_step = 10;
  sched.end_step = 60;
  sched.frequency = 10;
  sched.final_sparsity = 0.8;
  Solution pruned = prune_train(net, config, sched, init, data);

  auto [ticket, mask] = lottery_init(pruned, init);
  for (size_t i = 0; i < ticket.size(); ++i) {
    if (mask.bits()[i] == 0) {
      CHECK(ticket[i] == 0.0);
    } else {
      CHECK(ticket[i] == init[i]);
    }
  }

  Solution no_mask = train(net, config, init, std::nullopt, data);
  CHECK_THROWS_AS(lottery_init(no_mask, init), ValidationError);

  Solution all_ones = no_mask;
  all_ones.mask = SparsityMask::all_ones(net.layout());
  auto [same, ones] = lottery_init(all_ones, init);
  CHECK(same.values() == init.values());
}

TEST_CASE("sparse init sweep zeroes exact counts and reproduces the dense baseline") {
  Dataset data = small_task();
  Network net(small_arch());
  TrainConfig config = quick_config(40);

  auto runs = sparse_init_sweep(net, config, {0.0, 0.5}, data);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].zero_fraction == 0.0);
  CHECK(runs[0].solution.provenance == Provenance::SparseInit);

  // fraction 0 is the dense baseline, bitwise
  Solution dense = train(net, config, init_params(net.arch(), config.seed), std::nullopt, data);
  CHECK(runs[0].solution.params.values() == dense.params.values());

  // a one-step run at lr 0 exposes the zeroed init untouched
  TrainConfig frozen = config;
  frozen.total_steps = 1;
  frozen.lr = LrSchedule{0.1, 100, {}, 0.1};  // warmup makes step-0 lr exactly 0
  auto probe = sparse_init_sweep(net, frozen, {0.5}, data);
  int64_t weight_count = 0, zeros = 0;
  for (const auto& seg : net.layout()->segments()) {
    if (seg.kind != SegmentKind::Weight) continue;
    weight_count += seg.len();
    for (int64_t i = 0; i < seg.len(); ++i) {
      zeros += probe[0].solution.params[static_cast<size_t>(seg.offset + i)] == 0.0;
    }
  }
  CHECK(zeros == weight_count / 2);

  CHECK_THROWS_AS(sparse_init_sweep(net, config, {1.0}, data), ValidationError);
}

TEST_CASE("train validates configuration up front") {
  Dataset data = small_task();
  Network net(small_arch());
  ParamVector init = init_params(net.arch(), 4);
  TrainConfig bad = quick_config(0);
  CHECK_THROWS_AS(train(net, bad, init, std::nullopt, data), ValidationError);

  Network other(Architecture{{2, 9, 3}, {}, Activation::Relu});
  ParamVector wrong = init_params(other.arch(), 4);
  CHECK_THROWS_AS(train(net, quick_config(10), wrong, std::nullopt, data), ValidationError);
}

TEST_SUITE_END();
