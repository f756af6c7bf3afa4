#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sllb/dataset.hpp"
#include "sllb/error.hpp"
#include "sllb/landscape.hpp"
#include "sllb/rng.hpp"

using namespace sllb;

namespace {

LayoutPtr pair_layout() {
  SegmentDesc d;
  d.layer = 0;
  d.kind = SegmentKind::Weight;
  d.offset = 0;
  d.shape = {1, 2};
  return std::make_shared<Layout>(std::vector<SegmentDesc>{d});
}

LossProfile synthetic_profile(const std::vector<double>& ts, const std::vector<double>& totals) {
  LossProfile p;
  for (size_t i = 0; i < ts.size(); ++i) {
    ProfilePoint pt;
    pt.t = ts[i];
    pt.loss.total = totals[i];
    pt.loss.cross_entropy = totals[i];
    p.points.push_back(pt);
  }
  return p;
}

struct Fixture {
  Dataset data = make_synthetic(SyntheticKind::Blobs, 90, 0.3, 5);
  Network net{Architecture{{2, 6, 3}, {}, Activation::Relu}};
  ParamVector a = init_params(net.arch(), 1);
  ParamVector b = init_params(net.arch(), 2);
  Evaluator eval{net, data, 1e-4, 32, 7};
};

}  // namespace

TEST_SUITE_BEGIN("landscape");

TEST_CASE("grids are exact at the endpoints and at 0 and 1") {
  auto grid = default_grid();
  REQUIRE(grid.size() == 141);
  CHECK(grid.front() == -0.2);
  CHECK(grid.back() == 1.2);
  bool has_zero = false, has_one = false;
  for (double t : grid) {
    has_zero |= t == 0.0;
    has_one |= t == 1.0;
  }
  CHECK(has_zero);
  CHECK(has_one);
  for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

  auto coarse = make_grid(0.0, 1.0, 0.25);
  CHECK(coarse == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(make_grid(1.0, 0.0, 0.1), ValidationError);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("interpolate hits both endpoints bitwise") {
  Fixture f;
  ParamVector at0 = interpolate(f.a, f.b, 0.0);
  ParamVector at1 = interpolate(f.a, f.b, 1.0);
  CHECK(at0.values() == f.a.values());
  CHECK(at1.values() == f.b.values());
}

TEST_CASE("interpolate computes the affine combination") {
  auto layout = pair_layout();
  ParamVector s(layout, {0.0, 2.0});
  ParamVector e(layout, {4.0, 0.0});
  ParamVector mid = interpolate(s, e, 0.5);
  CHECK(mid.values() == std::vector<double>{2.0, 1.0});
  ParamVector outside = interpolate(s, e, -0.5);
  CHECK(outside.values() == std::vector<double>{-2.0, 3.0});

  ParamVector wrong(std::make_shared<Layout>(std::vector<SegmentDesc>{
      SegmentDesc{0, SegmentKind::Weight, 0, {1, 3}}}));
  CHECK_THROWS_AS(interpolate(s, wrong, 0.5), ValidationError);
}

TEST_CASE("profile endpoints equal direct evaluations") {
  Fixture f;
  LossProfile prof = profile_line(f.a, f.b, {0.0, 0.5, 1.0}, f.eval);
  LossBreakdown at_a = f.eval.eval(f.a);
  LossBreakdown at_b = f.eval.eval(f.b);
  CHECK(prof.points.front().loss.total == at_a.total);
  CHECK(prof.points.back().loss.total == at_b.total);
  CHECK(prof.points.front().loss.accuracy == at_a.accuracy);
}

TEST_CASE("a degenerate segment yields a flat profile") {
  Fixture f;
  LossProfile prof = profile_line(f.a, f.a, {0.0, 0.25, 0.5, 1.0}, f.eval);
  for (const auto& p : prof.points) {
    CHECK(p.loss.total == prof.points[0].loss.total);
    CHECK(p.loss.l2_term == prof.points[0].loss.l2_term);
  }
}

TEST_CASE("profiling is symmetric under endpoint swap") {
  Fixture f;
  // dyadic grid so 1-t is exact
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  LossProfile fwd = profile_line(f.a, f.b, grid, f.eval);
  LossProfile rev = profile_line(f.b, f.a, grid, f.eval);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(fwd.points[i].loss.total == rev.points[grid.size() - 1 - i].loss.total);
  }
}

TEST_CASE("multithreaded profiling matches single-threaded bitwise") {
  Fixture f;
  auto grid = make_grid(-0.2, 1.2, 0.05);
  LossProfile one = profile_line(f.a, f.b, grid, f.eval, 1);
  LossProfile four = profile_line(f.a, f.b, grid, f.eval, 4);
  REQUIRE(one.points.size() == four.points.size());
  for (size_t i = 0; i < one.points.size(); ++i) {
    CHECK(one.points[i].t == four.points[i].t);
    CHECK(one.points[i].loss.total == four.points[i].loss.total);
  }
}

TEST_CASE("profile rejects non-increasing grids") {
  Fixture f;
  CHECK_THROWS_AS(profile_line(f.a, f.b, {0.0, 0.5, 0.5, 1.0}, f.eval), ValidationError);
  CHECK_THROWS_AS(profile_line(f.a, f.b, {}, f.eval), ValidationError);
}

TEST_CASE("the l2 column is an exact decomposition and a quadratic in t") {
  Fixture f;
  auto grid = make_grid(-0.2, 1.2, 0.01);
  LossProfile prof = profile_line(f.a, f.b, grid, f.eval);
  std::vector<double> ts, l2s;
  for (const auto& p : prof.points) {
    ts.push_back(p.t);
    l2s.push_back(p.loss.l2_term);
    ParamVector theta = interpolate(f.a, f.b, p.t);
    long double acc = 0.0L;
    for (const auto& seg : theta.layout().segments()) {
      if (seg.kind != SegmentKind::Weight) continue;
      for (double v : theta.segment(seg)) acc += static_cast<long double>(v) * v;
    }
    CHECK(p.loss.l2_term ==
          doctest::Approx(1e-4 * 0.5 * static_cast<double>(acc)).epsilon(1e-12));
    CHECK(p.loss.total ==
          doctest::Approx(p.loss.cross_entropy + p.loss.l2_term).epsilon(1e-12));
  }
  CHECK(test::quadratic_fit_rel_residual(ts, l2s) < 1e-9);
}

TEST_CASE("evaluation is independent of the batch partition") {
  Fixture f;
  Evaluator coarse(f.net, f.data, 1e-4, 16, 3);
  Evaluator fine(f.net, f.data, 1e-4, 64, 9);
  LossBreakdown x = coarse.eval(f.a);
  LossBreakdown y = fine.eval(f.a);
  CHECK(x.total == doctest::Approx(y.total).epsilon(1e-12));
  CHECK(x.accuracy == y.accuracy);
}

TEST_CASE("batchnorm evaluation uses batch statistics and never mutates state") {
  Dataset data = make_synthetic(SyntheticKind::Blobs, 60, 0.3, 5);
  Network net(Architecture{{2, 6, 3}, {1}, Activation::Relu});
  ParamVector p = init_params(net.arch(), 1);
  Evaluator eval(net, data, 1e-4, 30, 7);
  LossBreakdown first = eval.eval(p);
  LossBreakdown second = eval.eval(p);
  CHECK(first.total == second.total);
  CHECK(std::isfinite(first.total));
}

TEST_CASE("monotonicity score counts increases against total descent") {
  auto strictly_down = synthetic_profile({0.0, 0.5, 1.0}, {3.0, 2.0, 1.0});
  MonotonicityScore s = monotonicity_score(strictly_down, 0.0, 1.0);
  CHECK(s.num_increases == 0);
  CHECK(s.max_increase == 0.0);
  CHECK(s.violation_mass == 0.0);
  CHECK(!s.degenerate_denominator);

  auto bumpy = synthetic_profile({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {3.0, 2.0, 2.5, 1.0});
  s = monotonicity_score(bumpy, 0.0, 1.0);
  CHECK(s.num_increases == 1);
  CHECK(s.max_increase == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.violation_mass == doctest::Approx(0.25).epsilon(1e-15));

  auto flat = synthetic_profile({0.0, 0.5, 1.0}, {2.0, 2.0, 2.0});
  s = monotonicity_score(flat, 0.0, 1.0);
  CHECK(s.num_increases == 0);
  CHECK(s.violation_mass == 0.0);
  CHECK(s.degenerate_denominator);

  CHECK_THROWS_AS(monotonicity_score(flat, 0.4, 0.45), ValidationError);
}

TEST_CASE("monotonicity score respects the requested range") {
  auto prof = synthetic_profile({-0.2, 0.0, 0.5, 1.0, 1.2}, {9.0, 3.0, 4.0, 1.0, 8.0});
  MonotonicityScore s = monotonicity_score(prof, 0.0, 1.0);
  CHECK(s.num_increases == 1);  // the rise at the tail lies outside [0,1]
  CHECK(s.max_increase == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.violation_mass == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("barrier height measures the peak above the higher endpoint") {
  auto peaked = synthetic_profile({0.0, 0.5, 1.0}, {1.0, 7.0, 1.0});
  CHECK(barrier_height(peaked) == doctest::Approx(6.0).epsilon(1e-15));

  auto monotone = synthetic_profile({0.0, 0.5, 1.0}, {3.0, 2.0, 1.0});
  CHECK(barrier_height(monotone) <= 0.0);

  auto with_margins = synthetic_profile({-0.2, 0.0, 0.5, 1.0, 1.2}, {99.0, 1.0, 4.0, 2.0, 88.0});
  CHECK(barrier_height(with_margins) == doctest::Approx(2.0).epsilon(1e-15));

  auto no_endpoint = synthetic_profile({0.1, 0.5, 1.0}, {1.0, 2.0, 1.0});
  CHECK_THROWS_AS(barrier_height(no_endpoint), ValidationError);
}

TEST_SUITE_END();
