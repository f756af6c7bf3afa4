#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sllb/bezier.hpp"
#include "sllb/error.hpp"
#include "sllb/rng.hpp"
#include "sllb/train.hpp"

using namespace sllb;

namespace {

struct Fixture {
  Dataset data = make_synthetic(SyntheticKind::Blobs, 90, 0.3, 5);
  Network net{Architecture{{2, 6, 3}, {}, Activation::Relu}};
  ParamVector a = init_params(net.arch(), 1);
  ParamVector b = init_params(net.arch(), 2);
  Evaluator eval{net, data, 1e-4, 32, 7};
};

}  // namespace

TEST_SUITE_BEGIN("bezier");

TEST_CASE("bernstein coefficients evaluate exactly") {
  CHECK(bernstein(2, 1, 0.5) == 0.5);
  CHECK(bernstein(3, 2, 0.25) == 0.140625);  // 3 * 0.75 * 0.0625
  CHECK(bernstein(2, 0, 0.0) == 1.0);
  CHECK(bernstein(2, 2, 1.0) == 1.0);
  CHECK_THROWS_AS(bernstein(2, 3, 0.5), ValidationError);
  CHECK_THROWS_AS(bernstein(2, -1, 0.5), ValidationError);
}

TEST_CASE("bernstein basis is a partition of unity") {
  Rng rng(123);
  for (int n : {2, 3}) {
    for (int k = 0; k < 1000; ++k) {
      const double t = rng.uniform();
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) sum += bernstein(n, i, t);
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("bezier_point pins the endpoints bitwise") {
  Fixture f;
  for (int order : {2, 3}) {
    BezierPath path = make_linear_path(f.a, f.b, order);
    CHECK(bezier_point(path, 0.0).values() == f.a.values());
    CHECK(bezier_point(path, 1.0).values() == f.b.values());
  }
}

TEST_CASE("order-2 midpoint combines control points with 1/4 1/2 1/4") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 2);
  ParamVector mid = bezier_point(path, 0.5);
  for (size_t i = 0; i < mid.size(); ++i) {
    const double want = 0.25 * path.control_points[0][i] + 0.5 * path.control_points[1][i] +
                        0.25 * path.control_points[2][i];
    CHECK(mid[i] == doctest::Approx(want).epsilon(1e-15));
  }
  CHECK_THROWS_AS(bezier_point(path, -0.1), ValidationError);
  CHECK_THROWS_AS(bezier_point(path, 1.1), ValidationError);
}

TEST_CASE("linear initialization places interior points on the segment") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 3);
  REQUIRE(path.control_points.size() == 4);
  for (size_t i = 0; i < f.a.size(); ++i) {
    const double lo = f.a[i], hi = f.b[i];
    CHECK(path.control_points[1][i] ==
          doctest::Approx(lo + (hi - lo) / 3.0).epsilon(1e-12));
    CHECK(path.control_points[2][i] ==
          doctest::Approx(lo + 2.0 * (hi - lo) / 3.0).epsilon(1e-12));
  }
  path.validate();
}

TEST_CASE("path validation enforces order, arity and constraint") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 2);
  path.order = 4;
  CHECK_THROWS_AS(path.validate(), ValidationError);
  path.order = 3;  // wrong control point count for this order
  CHECK_THROWS_AS(path.validate(), ValidationError);
  path.order = 2;
  path.constraint = magnitude_mask(f.a, 0.5);  // interior points violate it
  CHECK_THROWS_AS(path.validate(), ValidationError);
}

TEST_CASE("constrained construction masks the interior points") {
  Fixture f;
  SparsityMask mask = magnitude_mask(f.a, 0.6);
  ParamVector a = apply_mask(f.a, mask);
  ParamVector b = apply_mask(f.b, mask);
  BezierPath path = make_linear_path(a, b, 3, mask);
  path.validate();
  for (const auto& cp : path.control_points) {
    ParamVector masked = apply_mask(cp, mask);
    CHECK(masked.values() == cp.values());
  }
  ParamVector on_curve = bezier_point(path, 0.37);
  ParamVector masked = apply_mask(on_curve, mask);
  CHECK(masked.values() == on_curve.values());
}

TEST_CASE("interior gradients vanish exactly at t=0") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 3);
  Matrix x = gather_rows(f.data.features, {f.data.train_idx[0], f.data.train_idx[1]});
  std::vector<int64_t> y = gather_labels(f.data.labels, {f.data.train_idx[0], f.data.train_idx[1]});
  auto grads = path_grad(f.net, path, 0.0, x, y, 1e-4);
  REQUIRE(grads.size() == 2);
  for (const auto& g : grads) {
    for (double v : g.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("interior gradient is the bernstein-scaled curve gradient") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 2);
  Matrix x = gather_rows(f.data.features, {f.data.train_idx[0], f.data.train_idx[1],
                                           f.data.train_idx[2], f.data.train_idx[3]});
  std::vector<int64_t> y =
      gather_labels(f.data.labels, {f.data.train_idx[0], f.data.train_idx[1],
                                    f.data.train_idx[2], f.data.train_idx[3]});
  const double t = 0.3;
  auto grads = path_grad(f.net, path, t, x, y, 1e-4);
  REQUIRE(grads.size() == 1);

  ParamVector full(f.net.layout());
  f.net.loss_grad(bezier_point(path, t), x, y, 1e-4, Mode::Train, full);
  const double coef = bernstein(2, 1, t);
  CHECK(coef == doctest::Approx(0.42).epsilon(1e-15));
  for (size_t i = 0; i < full.size(); ++i) {
    CHECK(grads[0][i] == doctest::Approx(coef * full[i]).epsilon(1e-14));
  }
}

TEST_CASE("path gradients match finite differences over interior points") {
  Dataset data = make_synthetic(SyntheticKind::Blobs, 60, 0.3, 8);
  Network net(Architecture{{2, 5, 3}, {}, Activation::Relu});
  Matrix x = gather_rows(data.features, {data.train_idx[0], data.train_idx[1],
                                         data.train_idx[2], data.train_idx[3]});
  std::vector<int64_t> y = gather_labels(data.labels, {data.train_idx[0], data.train_idx[1],
                                                       data.train_idx[2], data.train_idx[3]});
  const double wd = 1e-4;
  for (int order : {2, 3}) {
    BezierPath path = make_linear_path(init_params(net.arch(), 3), init_params(net.arch(), 4),
                                       order);
    const double t = 0.35;
    auto grads = path_grad(net, path, t, x, y, wd);
    REQUIRE(grads.size() == static_cast<size_t>(order - 1));
    for (int interior = 1; interior < order; ++interior) {
      ParamVector& cp = path.control_points[static_cast<size_t>(interior)];
      ParamVector fd(net.layout());
      const double h = 1e-5;
      for (size_t j = 0; j < cp.size(); ++j) {
        const double orig = cp[j];
        cp[j] = orig + h;
        const double up = net.loss(bezier_point(path, t), x, y, wd, Mode::Train).total;
        cp[j] = orig - h;
        const double down = net.loss(bezier_point(path, t), x, y, wd, Mode::Train).total;
        cp[j] = orig;
        fd[j] = (up - down) / (2.0 * h);
      }
      CHECK(test::max_rel_err(grads[static_cast<size_t>(interior - 1)].values(), fd.values()) <
            1e-4);
    }
  }
}

TEST_CASE("optimization never moves the endpoints") {
  Fixture f;
  PathOptConfig config;
  config.steps = 40;
  config.batch_size = 16;
  config.base_lr = 0.01;
  config.momentum = 0.9;
  config.seed = 3;
  auto [path, trace] = optimize_path(f.net, f.a, f.b, 2, std::nullopt, config, f.data);
  CHECK(path.control_points.front().values() == f.a.values());
  CHECK(path.control_points.back().values() == f.b.values());
  CHECK(trace.size() == 40);
  for (const auto& row : trace) {
    CHECK(row.t >= 0.0);
    CHECK(row.t <= 1.0);
  }
}

TEST_CASE("zero-step optimization returns the straight-line path") {
  Fixture f;
  PathOptConfig config;
  config.steps = 0;
  auto [path, trace] = optimize_path(f.net, f.a, f.b, 2, std::nullopt, config, f.data);
  CHECK(trace.empty());
  BezierPath straight = make_linear_path(f.a, f.b, 2);
  for (size_t i = 0; i < path.control_points.size(); ++i) {
    CHECK(path.control_points[i].values() == straight.control_points[i].values());
  }

  LossProfile curve = profile_path(path, {0.0, 0.25, 0.5, 0.75, 1.0}, f.eval);
  LossProfile line = profile_line(f.a, f.b, {0.0, 0.25, 0.5, 0.75, 1.0}, f.eval);
  for (size_t i = 0; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].loss.total ==
          doctest::Approx(line.points[i].loss.total).epsilon(1e-12));
  }
}

TEST_CASE("constrained optimization keeps every control point in the subspace") {
  Fixture f;
  SparsityMask mask = magnitude_mask(f.a, 0.5);
  ParamVector a = apply_mask(f.a, mask);
  ParamVector b = apply_mask(f.b, mask);
  PathOptConfig config;
  config.steps = 60;
  config.batch_size = 16;
  config.seed = 5;
  auto [path, trace] = optimize_path(f.net, a, b, 3, mask, config, f.data);
  for (const auto& cp : path.control_points) {
    ParamVector masked = apply_mask(cp, mask);
    CHECK(masked.values() == cp.values());
  }
  // endpoints must satisfy the constraint up front
  CHECK_THROWS_AS(optimize_path(f.net, f.a, f.b, 3, mask, config, f.data), ValidationError);
}

TEST_CASE("optimization lowers the sampled loss between trained solutions") {
  Dataset data = make_synthetic(SyntheticKind::Blobs, 120, 0.4, 9);
  Network net(Architecture{{2, 8, 3}, {}, Activation::Relu});
  TrainConfig tc;
  tc.total_steps = 250;
  tc.batch_size = 32;
  tc.lr = LrSchedule{0.05, 0, {}, 0.1};
  tc.seed = 1;
  Solution s1 = train(net, tc, init_params(net.arch(), 11), std::nullopt, data);
  tc.seed = 2;
  Solution s2 = train(net, tc, init_params(net.arch(), 12), std::nullopt, data);

  PathOptConfig config;
  config.steps = 400;
  config.batch_size = 32;
  config.base_lr = 0.01;
  config.momentum = 0.95;
  config.seed = 6;
  auto [path, trace] = optimize_path(net, s1.params, s2.params, 2, std::nullopt, config, data);
  REQUIRE(trace.size() == 400);
  double first = 0.0, last = 0.0;
  for (size_t i = 0; i < 40; ++i) {
    first += trace[i].loss.total;
    last += trace[trace.size() - 40 + i].loss.total;
  }
  CHECK(last <= first);
}

TEST_CASE("path profiles require grids inside the unit interval") {
  Fixture f;
  BezierPath path = make_linear_path(f.a, f.b, 2);
  CHECK_THROWS_AS(profile_path(path, {-0.1, 0.5, 1.0}, f.eval), ValidationError);
  CHECK_THROWS_AS(profile_path(path, {0.0, 0.5, 1.2}, f.eval), ValidationError);
  LossProfile ok = profile_path(path, {0.0, 0.5, 1.0}, f.eval);
  CHECK(ok.points.front().loss.total == f.eval.eval(f.a).total);
  CHECK(ok.points.back().loss.total == f.eval.eval(f.b).total);
}

TEST_SUITE_END();
