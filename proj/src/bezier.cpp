#include "sllb/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sllb/error.hpp"
#include "sllb/rng.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

double binom(int n, int i) {
  double c = 1.0;
  for (int k = 1; k <= i; ++k) {
    c = c * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
  return c;
}

void check_order(int order) {
  if (order != 2 && order != 3) {
    throw ValidationError("Bezier order must be 2 or 3, got " + std::to_string(order));
  }
}

void check_unit_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("curve parameter t must lie in [0, 1], got " + format_f64(t));
  }
}

}  // namespace

void BezierPath::validate() const {
  check_order(order);
  if (control_points.size() != static_cast<size_t>(order) + 1) {
    throw ValidationError("BezierPath: expected " + std::to_string(order + 1) +
                          " control points, got " + std::to_string(control_points.size()));
  }
  for (size_t i = 1; i < control_points.size(); ++i) {
    if (!(control_points[i].layout() == control_points[0].layout())) {
      throw ValidationError("BezierPath: control point layouts differ");
    }
  }
  if (constraint) {
    for (size_t i = 0; i < control_points.size(); ++i) {
      if (!constraint->same_layout(control_points[i])) {
        throw ValidationError("BezierPath: constraint layout mismatch");
      }
      const auto& bits = constraint->bits();
      const auto& v = control_points[i].values();
      for (size_t j = 0; j < v.size(); ++j) {
        if (!bits[j] && v[j] != 0.0) {
          throw ValidationError("BezierPath: control point " + std::to_string(i) +
                                " violates the constraint mask at coordinate " +
                                std::to_string(j));
        }
      }
    }
  }
}

void PathOptConfig::validate() const {
  std::string problems;
  auto add = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (steps < 1) add("steps must be >= 1");
  if (batch_size < 1) add("batch_size must be >= 1");
  if (!(base_lr > 0.0)) add("base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) add("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) add("weight_decay must be >= 0");
  if (!problems.empty()) throw ValidationError("PathOptConfig: " + problems);
}

double bernstein(int n, int i, double t) {
  if (i < 0 || i > n) {
    throw ValidationError("bernstein: i must lie in [0, n], got i=" + std::to_string(i) +
                          " n=" + std::to_string(n));
  }
  return binom(n, i) * std::pow(1.0 - t, n - i) * std::pow(t, i);
}

BezierPath make_linear_path(const ParamVector& theta_0, const ParamVector& theta_n, int order,
                            std::optional<SparsityMask> constraint) {
  check_order(order);
  check_same_layout(theta_0, theta_n);
  BezierPath path;
  path.order = order;
  path.control_points.reserve(static_cast<size_t>(order) + 1);
  for (int i = 0; i <= order; ++i) {
    double a = static_cast<double>(i) / static_cast<double>(order);
    path.control_points.push_back(interpolate(theta_0, theta_n, a));
  }
  if (constraint) {
    path.constraint = std::move(constraint);
    for (auto& cp : path.control_points) apply_mask_in_place(cp, *path.constraint);
  }
  path.validate();
  return path;
}

ParamVector bezier_point(const BezierPath& path, double t) {
  check_unit_t(t);
  if (t == 0.0) return path.control_points.front();
  if (t == 1.0) return path.control_points.back();
  ParamVector out(path.control_points[0].layout_ptr());
  auto& o = out.values();
  for (int i = 0; i <= path.order; ++i) {
    double coef = bernstein(path.order, i, t);
    if (coef == 0.0) continue;
    const auto& cp = path.control_points[static_cast<size_t>(i)].values();
    for (size_t j = 0; j < o.size(); ++j) o[j] += coef * cp[j];
  }
  return out;
}

std::vector<ParamVector> path_grad(const Network& net, const BezierPath& path, double t,
                                   const Matrix& inputs, const std::vector<int64_t>& labels,
                                   double weight_decay, LossBreakdown* loss_out) {
  check_unit_t(t);
  ParamVector point = bezier_point(path, t);
  ParamVector grad(point.layout_ptr());
  LossBreakdown loss =
      net.loss_grad(point, inputs, labels, weight_decay, Mode::Train, grad, nullptr);
  if (loss_out) *loss_out = loss;
  std::vector<ParamVector> out;
  out.reserve(static_cast<size_t>(path.order) - 1);
  for (int i = 1; i < path.order; ++i) {
    double coef = bernstein(path.order, i, t);
    ParamVector gi(point.layout_ptr());
    add_scaled(gi, coef, grad);
    if (path.constraint) apply_mask_in_place(gi, *path.constraint);
    out.push_back(std::move(gi));
  }
  return out;
}

std::pair<BezierPath, std::vector<PathTraceRow>> optimize_path(
    const Network& net, const ParamVector& theta_0, const ParamVector& theta_n, int order,
    std::optional<SparsityMask> constraint, const PathOptConfig& config, const Dataset& data) {
  if (config.steps < 0) throw ValidationError("optimize_path: steps must be >= 0");
  if (constraint) {
    for (const ParamVector* endpoint : {&theta_0, &theta_n}) {
      const auto& v = endpoint->values();
      const auto& bits = constraint->bits();
      for (size_t j = 0; j < v.size(); ++j) {
        if (!bits[j] && v[j] != 0.0) {
          throw ValidationError(
              "optimize_path: endpoint violates the constraint mask at coordinate " +
              std::to_string(j));
        }
      }
    }
  }
  BezierPath path = make_linear_path(theta_0, theta_n, order, std::move(constraint));
  std::vector<PathTraceRow> trace;
  if (config.steps == 0) return {std::move(path), std::move(trace)};
  trace.reserve(static_cast<size_t>(config.steps));

  Rng rng(Rng::derive(config.seed, 0x7061746874ull));  // "patht"
  BatchStream stream(data, config.batch_size, config.seed);
  std::vector<ParamVector> velocity(static_cast<size_t>(order) - 1,
                                    ParamVector(theta_0.layout_ptr()));

  Matrix x;
  std::vector<int64_t> y;
  for (int64_t step = 0; step < config.steps; ++step) {
    stream.next(x, y);
    double t = rng.uniform();
    LossBreakdown loss;
    std::vector<ParamVector> grads = path_grad(net, path, t, x, y, config.weight_decay, &loss);
    if (!std::isfinite(loss.total)) {
      throw RuntimeError("path optimization diverged at step " + std::to_string(step) +
                         ": loss " + format_f64(loss.total));
    }
    trace.push_back({step, t, loss});

    for (int i = 1; i < order; ++i) {
      auto& v = velocity[static_cast<size_t>(i - 1)].values();
      auto& p = path.control_points[static_cast<size_t>(i)].values();
      const auto& g = grads[static_cast<size_t>(i - 1)].values();
      for (size_t j = 0; j < v.size(); ++j) {
        v[j] = config.momentum * v[j] + g[j];
        p[j] -= config.base_lr * v[j];
      }
      if (path.constraint) {
        apply_mask_in_place(path.control_points[static_cast<size_t>(i)], *path.constraint);
        apply_mask_in_place(velocity[static_cast<size_t>(i - 1)], *path.constraint);
      }
    }
  }
  return {std::move(path), std::move(trace)};
}

LossProfile profile_path(const BezierPath& path, const std::vector<double>& t_grid,
                         const Evaluator& eval, int64_t threads) {
  path.validate();
  if (t_grid.empty()) throw ValidationError("profile_path: empty t grid");
  for (size_t i = 0; i < t_grid.size(); ++i) {
    check_unit_t(t_grid[i]);
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw ValidationError("profile_path: t grid must be strictly increasing");
    }
  }
  LossProfile profile;
  profile.points.resize(t_grid.size());
  profile.dataset_id = eval.dataset_id;
  parallel_for(static_cast<int64_t>(t_grid.size()), threads, [&](int64_t i) {
    double t = t_grid[static_cast<size_t>(i)];
    profile.points[static_cast<size_t>(i)] = {t, eval.eval(bezier_point(path, t))};
  });
  return profile;
}

}  // namespace sllb
