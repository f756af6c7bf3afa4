#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sllb/error.hpp"
#include "sllb/mask.hpp"
#include "sllb/network.hpp"
#include "sllb/rng.hpp"
#include "sllb/schedule.hpp"

using namespace sllb;

namespace {

// A layout holding a single weight segment, handy for exact bit fixtures.
LayoutPtr weight_only_layout(int64_t len) {
  SegmentDesc d;
  d.layer = 0;
  d.kind = SegmentKind::Weight;
  d.offset = 0;
  d.shape = {1, len};
  return std::make_shared<Layout>(std::vector<SegmentDesc>{d});
}

ParamVector random_params(const LayoutPtr& layout, uint64_t seed) {
  ParamVector p(layout);
  Rng rng(seed);
  for (double& v : p.values()) v = rng.normal();
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("sparsity");

TEST_CASE("magnitude mask drops the smaller half by |w|") {
  auto layout = weight_only_layout(4);
  ParamVector p(layout, {0.1, -0.5, 0.3, -0.2});
  SparsityMask m = magnitude_mask(p, 0.5);
  CHECK(m.bits() == std::vector<uint8_t>{0, 1, 1, 0});
}

TEST_CASE("sparsity zero yields the all-ones mask") {
  Network net(Architecture{{3, 4, 2}, {}, Activation::Relu});
  ParamVector p = init_params(net.arch(), 2);
  SparsityMask m = magnitude_mask(p, 0.0);
  for (uint8_t b : m.bits()) CHECK(b == 1);
  CHECK(mask_sparsity(m, SparsityScope::Global) == 0.0);
}

TEST_CASE("bias and batchnorm segments are never pruned") {
  Architecture arch{{3, 4, 2}, {1}, Activation::Relu};
  Network net(arch);
  ParamVector p = random_params(net.layout(), 5);
  SparsityMask m = magnitude_mask(p, 0.9);
  for (const auto& seg : p.layout().segments()) {
    if (seg.kind == SegmentKind::Weight) continue;
    for (int64_t i = 0; i < seg.len(); ++i) {
      CHECK(m.bits()[static_cast<size_t>(seg.offset + i)] == 1);
    }
  }
}

TEST_CASE("mask at 0.91 on 1000 weights matches the sort-based oracle") {
  auto layout = weight_only_layout(1000);
  ParamVector p = random_params(layout, 77);
  SparsityMask m = magnitude_mask(p, 0.91);

  int64_t zeros = 0;
  double max_dropped = 0.0, min_kept = 1e300;
  for (size_t i = 0; i < 1000; ++i) {
    if (m.bits()[i] == 0) {
      ++zeros;
      max_dropped = std::max(max_dropped, std::fabs(p[i]));
    } else {
      min_kept = std::min(min_kept, std::fabs(p[i]));
    }
  }
  CHECK(zeros == 910);
  CHECK(min_kept >= max_dropped);
  CHECK(m.bits() == test::sorted_mask_bits(p.values(), 0.91));
}

TEST_CASE("magnitude ties are pruned lowest index first") {
  auto layout = weight_only_layout(4);
  ParamVector p(layout, {0.5, -0.5, 0.5, 1.0});
  SparsityMask m = magnitude_mask(p, 0.5);
  CHECK(m.bits() == std::vector<uint8_t>{0, 0, 1, 1});
  CHECK(m.bits() == test::sorted_mask_bits(p.values(), 0.5));
}

TEST_CASE("apply_mask with all ones is the bitwise identity") {
  Network net(Architecture{{2, 5, 3}, {}, Activation::Relu});
  ParamVector p = init_params(net.arch(), 8);
  ParamVector q = apply_mask(p, SparsityMask::all_ones(net.layout()));
  CHECK(q.values() == p.values());
}

TEST_CASE("apply_mask is idempotent and zeroes exactly the masked coordinates") {
  Network net(Architecture{{4, 6, 3}, {}, Activation::Relu});
  ParamVector p = random_params(net.layout(), 3);
  SparsityMask m = magnitude_mask(p, 0.7);
  ParamVector once = apply_mask(p, m);
  ParamVector twice = apply_mask(once, m);
  CHECK(once.values() == twice.values());
  for (size_t i = 0; i < once.size(); ++i) {
    if (m.bits()[i] == 0) {
      CHECK(once[i] == 0.0);
      CHECK(!std::signbit(once[i]));  // exact +0, not -0
    } else {
      CHECK(once[i] == p[i]);
    }
  }
}

TEST_CASE("apply_mask rejects layout mismatches") {
  Network a(Architecture{{2, 3, 2}, {}, Activation::Relu});
  Network b(Architecture{{2, 4, 2}, {}, Activation::Relu});
  ParamVector p = init_params(a.arch(), 1);
  CHECK_THROWS_AS(apply_mask(p, SparsityMask::all_ones(b.layout())), ValidationError);
}

TEST_CASE("mask_sparsity counts zero bits in the requested scope") {
  auto layout = weight_only_layout(4);
  SparsityMask m(layout, {0, 1, 1, 0});
  CHECK(mask_sparsity(m, SparsityScope::Global) == 0.5);
  CHECK(mask_sparsity(SparsityMask::all_ones(layout), SparsityScope::Global) == 0.0);
}

TEST_CASE("per-layer targets 0.8/0.9 on equal layers give 0.85 prunable sparsity") {
  Network net(Architecture{{10, 10, 10}, {}, Activation::Relu});
  ParamVector p = random_params(net.layout(), 12);
  SparsityMask m = magnitude_mask(p, std::vector<double>{0.8, 0.9});
  CHECK(mask_sparsity(m, SparsityScope::PrunableOnly) == doctest::Approx(0.85).epsilon(1e-15));
  auto per_layer = m.per_layer_sparsity();
  REQUIRE(per_layer.size() == 2);
  CHECK(per_layer[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(per_layer[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("skip_first_layer keeps the first weight segment dense") {
  Network net(Architecture{{6, 6, 6}, {}, Activation::Relu});
  ParamVector p = random_params(net.layout(), 9);
  PruneExclusions excl;
  excl.skip_first_layer = true;
  SparsityMask m = magnitude_mask(p, 0.5, excl);
  const auto& segs = p.layout().segments();
  for (int64_t i = 0; i < segs[0].len(); ++i) {
    CHECK(m.bits()[static_cast<size_t>(segs[0].offset + i)] == 1);
  }
  // second weight layer still pruned at the target
  int64_t zeros = 0;
  for (int64_t i = 0; i < segs[2].len(); ++i) {
    zeros += m.bits()[static_cast<size_t>(segs[2].offset + i)] == 0;
  }
  CHECK(zeros == 18);
}

TEST_CASE("per-layer caps limit the sparsity of capped layers") {
  Network net(Architecture{{8, 8, 8}, {}, Activation::Relu});
  ParamVector p = random_params(net.layout(), 14);
  PruneExclusions excl;
  excl.layer_caps[1] = 0.25;
  SparsityMask m = magnitude_mask(p, 0.75, excl);
  auto per_layer = m.per_layer_sparsity();
  CHECK(per_layer[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(per_layer[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("global scope pools weights across layers") {
  Network net(Architecture{{6, 4, 6}, {}, Activation::Relu});
  ParamVector p = random_params(net.layout(), 25);
  SparsityMask m = magnitude_mask(p, 0.5, {}, MaskScope::Global);
  // exactly floor(0.5 * 48) zeros over the pooled weight segments
  int64_t zeros = 0;
  double max_dropped = 0.0, min_kept = 1e300;
  for (const auto& seg : p.layout().segments()) {
    if (seg.kind != SegmentKind::Weight) continue;
    for (int64_t i = 0; i < seg.len(); ++i) {
      const auto k = static_cast<size_t>(seg.offset + i);
      if (m.bits()[k] == 0) {
        ++zeros;
        max_dropped = std::max(max_dropped, std::fabs(p[k]));
      } else {
        min_kept = std::min(min_kept, std::fabs(p[k]));
      }
    }
  }
  CHECK(zeros == 24);
  CHECK(min_kept >= max_dropped);
}

TEST_CASE("mask_and intersects kept coordinates") {
  auto layout = weight_only_layout(4);
  SparsityMask a(layout, {0, 1, 1, 0});
  SparsityMask b(layout, {1, 1, 0, 0});
  SparsityMask c = mask_and(a, b);
  CHECK(c.bits() == std::vector<uint8_t>{0, 1, 0, 0});
}

TEST_CASE("mask construction validates bits") {
  auto layout = weight_only_layout(3);
  CHECK_THROWS_AS(SparsityMask(layout, {0, 1}), ValidationError);
  CHECK_THROWS_AS(SparsityMask(layout, {0, 1, 2}), ValidationError);
}

TEST_CASE("target_sparsity follows the cubic ramp") {
  PruningSchedule sched;
  sched.start_step = 0;
  sched.end_step = 100;
  sched.frequency = 10;
  sched.initial_sparsity = 0.0;
  sched.final_sparsity = 0.8;
  sched.exponent = 3.0;

  CHECK(target_sparsity(sched, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(target_sparsity(sched, 100) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(target_sparsity(sched, 150) == doctest::Approx(0.8).epsilon(1e-15));
  // s(50) = 0.8 + (0 - 0.8) * 0.5^3 = 0.7
  CHECK(target_sparsity(sched, 50) == doctest::Approx(0.7).epsilon(1e-12));

  PruningSchedule later = sched;
  later.start_step = 40;
  later.end_step = 140;
  CHECK(later.start_step == 40);
  CHECK(target_sparsity(later, 39) == 0.0);
  CHECK(target_sparsity(later, 90) == doctest::Approx(0.7).epsilon(1e-12));

  double prev = 0.0;
  for (int64_t s = 0; s <= 160; ++s) {
    const double cur = target_sparsity(sched, s);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("prune events run every frequency steps and always include the end") {
  PruningSchedule sched;
  sched.start_step = 600;
  sched.end_step = 2400;
  sched.frequency = 200;
  auto ev = prune_event_steps(sched);
  REQUIRE(ev.size() == 10);
  CHECK(ev.front() == 600);
  CHECK(ev.back() == 2400);
  for (size_t i = 1; i < ev.size(); ++i) CHECK(ev[i] - ev[i - 1] == 200);

  sched.frequency = 700;  // start, start+700, start+1400 then forced end
  ev = prune_event_steps(sched);
  CHECK(ev == std::vector<int64_t>{600, 1300, 2000, 2400});
}

TEST_CASE("schedule validation rejects degenerate windows and factors") {
  PruningSchedule sched;
  sched.start_step = 100;
  sched.end_step = 100;
  CHECK_THROWS_AS(sched.validate(), ValidationError);
  sched.end_step = 200;
  sched.frequency = 0;
  CHECK_THROWS_AS(sched.validate(), ValidationError);
  sched.frequency = 10;
  sched.final_sparsity = 1.0;
  CHECK_THROWS_AS(sched.validate(), ValidationError);

  LrSchedule lr;
  lr.drop_factor = 1.0;
  CHECK_THROWS_AS(lr.validate(), ValidationError);
  lr.drop_factor = 0.1;
  lr.drop_steps = {200, 100};
  CHECK_THROWS_AS(lr.validate(), ValidationError);
}

TEST_SUITE_END();
