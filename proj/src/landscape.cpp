#include "sllb/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sllb/error.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

constexpr double kMicro = 1e6;

// Neumaier-compensated accumulator; order-stable to ~1 ulp.
struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("make_grid: step must be positive");
  if (!(hi >= lo)) throw ValidationError("make_grid: hi must be >= lo");
  auto lo_u = static_cast<int64_t>(std::llround(lo * kMicro));
  auto hi_u = static_cast<int64_t>(std::llround(hi * kMicro));
  auto step_u = static_cast<int64_t>(std::llround(step * kMicro));
  if (step_u <= 0) throw ValidationError("make_grid: step below 1e-6 resolution");
  std::vector<double> grid;
  for (int64_t u = lo_u; u <= hi_u; u += step_u) {
    grid.push_back(static_cast<double>(u) / kMicro);
  }
  return grid;
}

std::vector<double> default_grid() { return make_grid(-0.2, 1.2, 0.01); }

ParamVector interpolate(const ParamVector& theta_s, const ParamVector& theta_e, double t) {
  check_same_layout(theta_s, theta_e);
  if (t == 0.0) return theta_s;
  if (t == 1.0) return theta_e;
  ParamVector out(theta_s.layout_ptr());
  const auto& s = theta_s.values();
  const auto& e = theta_e.values();
  auto& o = out.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = t * e[i] + (1.0 - t) * s[i];
  return out;
}

Evaluator::Evaluator(const Network& net, Matrix features, std::vector<int64_t> labels,
                     double weight_decay, int64_t batch_size, uint64_t seed, L2Scope scope)
    : net_(net),
      features_(std::move(features)),
      labels_(std::move(labels)),
      weight_decay_(weight_decay),
      scope_(scope) {
  if (features_.rows() != static_cast<int64_t>(labels_.size())) {
    throw ValidationError("Evaluator: features rows != labels length");
  }
  if (features_.rows() < 1) throw ValidationError("Evaluator: empty evaluation set");
  if (batch_size < 1) throw ValidationError("Evaluator: batch_size must be >= 1");
  if (weight_decay < 0.0) throw ValidationError("Evaluator: weight_decay must be >= 0");
  partition_ = batches(features_.rows(), batch_size, seed, /*epoch=*/0);
}

Evaluator::Evaluator(const Network& net, const Dataset& data, double weight_decay,
                     int64_t batch_size, uint64_t seed, L2Scope scope)
    : Evaluator(net, gather_rows(data.features, data.train_idx),
                gather_labels(data.labels, data.train_idx), weight_decay, batch_size, seed,
                scope) {
  dataset_id = data.id;
}

LossBreakdown Evaluator::eval(const ParamVector& params) const {
  Kahan ce_sum;
  int64_t hits = 0;
  for (const auto& slice : partition_) {
    Matrix x = gather_rows(features_, slice);
    std::vector<int64_t> y;
    y.reserve(slice.size());
    for (int64_t i : slice) y.push_back(labels_[static_cast<size_t>(i)]);
    // train mode = batch statistics for BN nets; no running state is passed,
    // so evaluation never mutates anything
    Matrix logits = net_.forward(params, x, Mode::Train, nullptr);
    int64_t batch_hits = 0;
    double mean_ce = softmax_cross_entropy(logits, y, nullptr, &batch_hits);
    ce_sum.add(mean_ce * static_cast<double>(slice.size()));
    hits += batch_hits;
  }
  LossBreakdown out;
  auto n = static_cast<double>(features_.rows());
  out.cross_entropy = ce_sum.value() / n;
  out.l2_term = weight_decay_ == 0.0 ? 0.0 : weight_decay_ * l2_half_sum(params, scope_);
  out.total = out.cross_entropy + out.l2_term;
  out.accuracy = static_cast<double>(hits) / n;
  return out;
}

LossProfile profile_line(const ParamVector& theta_s, const ParamVector& theta_e,
                         const std::vector<double>& t_grid, const Evaluator& eval,
                         int64_t threads) {
  check_same_layout(theta_s, theta_e);
  if (t_grid.empty()) throw ValidationError("profile_line: empty t grid");
  for (size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw ValidationError("profile_line: t grid must be strictly increasing");
    }
  }
  LossProfile profile;
  profile.points.resize(t_grid.size());
  profile.dataset_id = eval.dataset_id;
  parallel_for(static_cast<int64_t>(t_grid.size()), threads, [&](int64_t i) {
    double t = t_grid[static_cast<size_t>(i)];
    ParamVector theta = interpolate(theta_s, theta_e, t);
    profile.points[static_cast<size_t>(i)] = {t, eval.eval(theta)};
  });
  return profile;
}

MonotonicityScore monotonicity_score(const LossProfile& profile, double t_lo, double t_hi) {
  if (!(t_hi > t_lo)) throw ValidationError("monotonicity_score: need t_hi > t_lo");
  std::vector<const ProfilePoint*> pts;
  for (const auto& p : profile.points) {
    if (p.t >= t_lo && p.t <= t_hi) pts.push_back(&p);
  }
  if (pts.size() < 2) {
    throw ValidationError("monotonicity_score: fewer than 2 profile points in range");
  }
  MonotonicityScore score;
  double increase_sum = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    double d = pts[i]->loss.total - pts[i - 1]->loss.total;
    if (d > 0.0) {
      score.num_increases += 1;
      score.max_increase = std::max(score.max_increase, d);
      increase_sum += d;
    }
  }
  double descent = pts.front()->loss.total - pts.back()->loss.total;
  if (descent <= 0.0) {
    score.degenerate_denominator = true;
    score.violation_mass = 0.0;
  } else {
    score.violation_mass = increase_sum / descent;
  }
  return score;
}

double barrier_height(const LossProfile& profile) {
  const ProfilePoint* at0 = nullptr;
  const ProfilePoint* at1 = nullptr;
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& p : profile.points) {
    if (p.t < 0.0 || p.t > 1.0) continue;
    peak = std::max(peak, p.loss.total);
    if (p.t == 0.0) at0 = &p;
    if (p.t == 1.0) at1 = &p;
  }
  if (!at0 || !at1) {
    throw ValidationError("barrier_height: profile must contain grid points at t=0 and t=1");
  }
  return peak - std::max(at0->loss.total, at1->loss.total);
}

}  // namespace sllb
