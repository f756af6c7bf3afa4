#include "sllb/network.hpp"

#include <cmath>
#include <string>

#include "sllb/rng.hpp"

namespace sllb {

namespace {

// Neumaier compensated sum; keeps per-example accumulations stable enough
// that batch partitioning does not move totals beyond ~1 ulp.
struct KahanSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct LayerCache {
  Matrix pre_bn;     // linear output before batch norm
  Matrix pre_act;    // input of the activation (post-BN when BN is on)
  Matrix xhat;       // normalized pre-activation, BN layers only
  std::vector<double> mean, inv_std;  // statistics used by the BN transform
};

void add_bias(Matrix& z, std::span<const double> bias) {
  for (int64_t i = 0; i < z.rows(); ++i) {
    double* zi = z.row(i);
    for (int64_t j = 0; j < z.cols(); ++j) zi[j] += bias[static_cast<size_t>(j)];
  }
}

// z = a * W for row-major W stored as a flat span of shape (fan_in, fan_out).
Matrix linear(const Matrix& a, std::span<const double> w, size_t fan_in, size_t fan_out) {
  Matrix z(a.rows(), static_cast<int64_t>(fan_out));
  for (int64_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* zi = z.row(i);
    for (size_t k = 0; k < fan_in; ++k) {
      const double aik = ai[k];
      const double* wk = w.data() + k * fan_out;
      for (size_t j = 0; j < fan_out; ++j) zi[j] += aik * wk[j];
    }
  }
  return z;
}

// delta(m,fan_out) * W^T -> (m,fan_in)
Matrix linear_backward_input(const Matrix& delta, std::span<const double> w, size_t fan_in,
                             size_t fan_out) {
  Matrix out(delta.rows(), static_cast<int64_t>(fan_in));
  for (int64_t i = 0; i < delta.rows(); ++i) {
    const double* di = delta.row(i);
    double* oi = out.row(i);
    for (size_t k = 0; k < fan_in; ++k) {
      const double* wk = w.data() + k * fan_out;
      double acc = 0.0;
      for (size_t j = 0; j < fan_out; ++j) acc += di[j] * wk[j];
      oi[k] = acc;
    }
  }
  return out;
}

void check_layout(const ParamVector& params, const LayoutPtr& expected) {
  const LayoutPtr& got = params.layout_ptr();
  if (got == expected) return;
  if (!got || !(*got == *expected)) {
    throw ValidationError("Network: parameter vector layout does not match architecture");
  }
}

void relu_in_place(Matrix& z) {
  for (auto& v : z.data()) v = v > 0.0 ? v : 0.0;
}

}  // namespace

BnState make_bn_state(const Architecture& arch) {
  BnState state;
  state.mean.resize(static_cast<size_t>(arch.n_hidden()));
  state.var.resize(static_cast<size_t>(arch.n_hidden()));
  for (int l = 0; l < arch.n_hidden(); ++l) {
    if (arch.batchnorm_at(l)) {
      const auto width = static_cast<size_t>(arch.layer_sizes[static_cast<size_t>(l) + 1]);
      state.mean[static_cast<size_t>(l)].assign(width, 0.0);
      state.var[static_cast<size_t>(l)].assign(width, 1.0);
    }
  }
  return state;
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<int64_t>& labels,
                             Matrix* dlogits, int64_t* correct) {
  const size_t batch = logits.rows();
  const size_t classes = logits.cols();
  if (labels.size() != batch) {
    throw ValidationError("softmax_cross_entropy: label count does not match batch size");
  }
  if (dlogits) *dlogits = Matrix(batch, classes);
  KahanSum ce;
  int64_t hits = 0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (size_t i = 0; i < batch; ++i) {
    const int64_t y = labels[i];
    if (y < 0 || static_cast<size_t>(y) >= classes) {
      throw ValidationError("softmax_cross_entropy: label " + std::to_string(y) +
                            " out of range [0, " + std::to_string(classes) + ") at row " +
                            std::to_string(i));
    }
    const double* zi = logits.row(i);
    double zmax = zi[0];
    size_t argmax = 0;
    for (size_t j = 1; j < classes; ++j) {
      if (zi[j] > zmax) {
        zmax = zi[j];
        argmax = j;
      }
    }
    double sum_exp = 0.0;
    for (size_t j = 0; j < classes; ++j) sum_exp += std::exp(zi[j] - zmax);
    const double lse = zmax + std::log(sum_exp);
    ce.add(lse - zi[static_cast<size_t>(y)]);
    if (argmax == static_cast<size_t>(y)) ++hits;
    if (dlogits) {
      double* di = dlogits->row(i);
      for (size_t j = 0; j < classes; ++j) {
        di[j] = std::exp(zi[j] - zmax) / sum_exp * inv_batch;
      }
      di[static_cast<size_t>(y)] -= inv_batch;
    }
  }
  if (correct) *correct = hits;
  return ce.value() * inv_batch;
}

Network::Network(Architecture arch) : arch_(std::move(arch)) {
  layout_ = make_layout(arch_);
}

namespace {

// Shared forward pass; fills caches only when requested (grad path).
Matrix run_forward(const Architecture& arch, const Layout& layout, const ParamVector& params,
                   const Matrix& inputs, Mode mode, BnState* bn,
                   std::vector<LayerCache>* caches, std::vector<Matrix>* activations) {
  if (inputs.cols() != arch.layer_sizes[0]) {
    throw ValidationError("forward: input width " + std::to_string(inputs.cols()) +
                          " does not match architecture input size " +
                          std::to_string(arch.layer_sizes[0]));
  }
  if (arch.has_batchnorm() && mode == Mode::Eval && bn == nullptr) {
    throw ValidationError("forward: eval mode with batch norm requires running statistics");
  }
  const size_t batch = inputs.rows();
  Matrix a = inputs;
  if (activations) activations->push_back(a);
  for (int l = 0; l < arch.n_linear(); ++l) {
    const SegmentDesc* wd = layout.find(l, SegmentKind::Weight);
    const SegmentDesc* bd = layout.find(l, SegmentKind::Bias);
    const size_t fan_in = wd->shape[0], fan_out = wd->shape[1];
    Matrix z = linear(a, params.segment(*wd), fan_in, fan_out);
    add_bias(z, params.segment(*bd));

    LayerCache cache;
    if (caches) cache.pre_bn = z;

    const bool is_hidden = l < arch.n_hidden();
    if (is_hidden && arch.batchnorm_at(l)) {
      const SegmentDesc* gd = layout.find(l, SegmentKind::BnGamma);
      const SegmentDesc* betad = layout.find(l, SegmentKind::BnBeta);
      auto gamma = params.segment(*gd);
      auto beta = params.segment(*betad);
      std::vector<double> mean(fan_out, 0.0), var(fan_out, 0.0);
      if (mode == Mode::Train) {
        for (size_t i = 0; i < batch; ++i) {
          const double* zi = z.row(i);
          for (size_t j = 0; j < fan_out; ++j) mean[j] += zi[j];
        }
        for (size_t j = 0; j < fan_out; ++j) mean[j] /= static_cast<double>(batch);
        for (size_t i = 0; i < batch; ++i) {
          const double* zi = z.row(i);
          for (size_t j = 0; j < fan_out; ++j) {
            const double d = zi[j] - mean[j];
            var[j] += d * d;
          }
        }
        for (size_t j = 0; j < fan_out; ++j) var[j] /= static_cast<double>(batch);
        if (bn) {
          auto& rm = bn->mean[static_cast<size_t>(l)];
          auto& rv = bn->var[static_cast<size_t>(l)];
          for (size_t j = 0; j < fan_out; ++j) {
            rm[j] = kBnMomentum * rm[j] + (1.0 - kBnMomentum) * mean[j];
            rv[j] = kBnMomentum * rv[j] + (1.0 - kBnMomentum) * var[j];
          }
        }
      } else {
        mean = bn->mean[static_cast<size_t>(l)];
        var = bn->var[static_cast<size_t>(l)];
      }
      std::vector<double> inv_std(fan_out);
      for (size_t j = 0; j < fan_out; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + kBnEpsilon);
      Matrix xhat(batch, fan_out);
      for (size_t i = 0; i < batch; ++i) {
        const double* zi = z.row(i);
        double* xi = xhat.row(i);
        double* zo = z.row(i);
        for (size_t j = 0; j < fan_out; ++j) {
          xi[j] = (zi[j] - mean[j]) * inv_std[j];
          zo[j] = gamma[j] * xi[j] + beta[j];
        }
      }
      if (caches) {
        cache.xhat = std::move(xhat);
        cache.mean = std::move(mean);
        cache.inv_std = std::move(inv_std);
      }
    }

    if (caches) cache.pre_act = z;
    if (is_hidden) relu_in_place(z);
    if (caches) caches->push_back(std::move(cache));
    a = std::move(z);
    if (activations) activations->push_back(a);
  }
  return a;
}

}  // namespace

double l2_half_sum(const ParamVector& params, L2Scope scope) {
  double acc = 0.0;
  for (const auto& seg : params.layout().segments()) {
    if (scope == L2Scope::WeightsOnly && seg.kind != SegmentKind::Weight) continue;
    auto vals = params.segment(seg);
    for (double v : vals) acc += v * v;
  }
  return 0.5 * acc;
}

Matrix Network::forward(const ParamVector& params, const Matrix& inputs, Mode mode,
                        BnState* bn) const {
  check_layout(params, layout_);
  return run_forward(arch_, *layout_, params, inputs, mode, bn, nullptr, nullptr);
}

LossBreakdown Network::loss(const ParamVector& params, const Matrix& inputs,
                            const std::vector<int64_t>& labels, double weight_decay, Mode mode,
                            BnState* bn, L2Scope scope) const {
  if (weight_decay < 0.0) throw ValidationError("loss: weight_decay must be >= 0");
  Matrix logits = forward(params, inputs, mode, bn);
  int64_t hits = 0;
  LossBreakdown out;
  out.cross_entropy = softmax_cross_entropy(logits, labels, nullptr, &hits);
  out.l2_term = weight_decay == 0.0 ? 0.0 : weight_decay * l2_half_sum(params, scope);
  out.total = out.cross_entropy + out.l2_term;
  out.accuracy = static_cast<double>(hits) / static_cast<double>(inputs.rows());
  return out;
}

LossBreakdown Network::loss_grad(const ParamVector& params, const Matrix& inputs,
                                 const std::vector<int64_t>& labels, double weight_decay,
                                 Mode mode, ParamVector& grad, BnState* bn,
                                 L2Scope scope) const {
  if (weight_decay < 0.0) throw ValidationError("loss_grad: weight_decay must be >= 0");
  check_layout(params, layout_);

  std::vector<LayerCache> caches;
  std::vector<Matrix> activations;
  caches.reserve(static_cast<size_t>(arch_.n_linear()));
  Matrix logits =
      run_forward(arch_, *layout_, params, inputs, mode, bn, &caches, &activations);

  int64_t hits = 0;
  Matrix delta;
  LossBreakdown out;
  out.cross_entropy = softmax_cross_entropy(logits, labels, &delta, &hits);
  out.l2_term = weight_decay == 0.0 ? 0.0 : weight_decay * l2_half_sum(params, scope);
  out.total = out.cross_entropy + out.l2_term;
  out.accuracy = static_cast<double>(hits) / static_cast<double>(inputs.rows());

  grad = ParamVector(layout_);
  const size_t batch = inputs.rows();

  for (int l = arch_.n_linear() - 1; l >= 0; --l) {
    const SegmentDesc* wd = layout_->find(l, SegmentKind::Weight);
    const SegmentDesc* bd = layout_->find(l, SegmentKind::Bias);
    const size_t fan_in = wd->shape[0], fan_out = wd->shape[1];
    const bool is_hidden = l < arch_.n_hidden();
    LayerCache& cache = caches[static_cast<size_t>(l)];

    if (is_hidden) {
      // Backprop through relu: pre_act holds the activation input.
      for (size_t i = 0; i < batch; ++i) {
        const double* pre = cache.pre_act.row(i);
        double* di = delta.row(i);
        for (size_t j = 0; j < fan_out; ++j) {
          if (pre[j] <= 0.0) di[j] = 0.0;
        }
      }
    }

    if (is_hidden && arch_.batchnorm_at(l)) {
      const SegmentDesc* gd = layout_->find(l, SegmentKind::BnGamma);
      const SegmentDesc* betad = layout_->find(l, SegmentKind::BnBeta);
      auto gamma = params.segment(*gd);
      auto g_gamma = grad.segment(*gd);
      auto g_beta = grad.segment(*betad);
      if (mode == Mode::Train) {
        // Batch statistics participate in the graph.
        const auto& xhat = cache.xhat;
        const auto& inv_std = cache.inv_std;
        const auto& mean = cache.mean;
        std::vector<double> sum_dxhat(fan_out, 0.0), sum_dxhat_xc(fan_out, 0.0);
        for (size_t i = 0; i < batch; ++i) {
          const double* di = delta.row(i);
          const double* xi = xhat.row(i);
          const double* zi = cache.pre_bn.row(i);
          for (size_t j = 0; j < fan_out; ++j) {
            g_gamma[j] += di[j] * xi[j];
            g_beta[j] += di[j];
            const double dxhat = di[j] * gamma[j];
            sum_dxhat[j] += dxhat;
            sum_dxhat_xc[j] += dxhat * (zi[j] - mean[j]);
          }
        }
        std::vector<double> dvar(fan_out), dmean(fan_out);
        for (size_t j = 0; j < fan_out; ++j) {
          dvar[j] = sum_dxhat_xc[j] * -0.5 * inv_std[j] * inv_std[j] * inv_std[j];
          dmean[j] = -inv_std[j] * sum_dxhat[j];
        }
        const double inv_batch = 1.0 / static_cast<double>(batch);
        for (size_t i = 0; i < batch; ++i) {
          double* di = delta.row(i);
          const double* zi = cache.pre_bn.row(i);
          for (size_t j = 0; j < fan_out; ++j) {
            const double dxhat = di[j] * gamma[j];
            di[j] = dxhat * inv_std[j] +
                    dvar[j] * 2.0 * (zi[j] - mean[j]) * inv_batch + dmean[j] * inv_batch;
          }
        }
      } else {
        // Running statistics are constants here.
        const auto& rm = bn->mean[static_cast<size_t>(l)];
        const auto& rv = bn->var[static_cast<size_t>(l)];
        for (size_t i = 0; i < batch; ++i) {
          double* di = delta.row(i);
          const double* zi = cache.pre_bn.row(i);
          for (size_t j = 0; j < fan_out; ++j) {
            const double inv = 1.0 / std::sqrt(rv[j] + kBnEpsilon);
            const double xh = (zi[j] - rm[j]) * inv;
            g_gamma[j] += di[j] * xh;
            g_beta[j] += di[j];
            di[j] = di[j] * gamma[j] * inv;
          }
        }
      }
    }

    // dW = a_prev^T * delta; db = column sums of delta; d(a_prev) = delta * W^T.
    const Matrix& a_prev = activations[static_cast<size_t>(l)];
    Matrix dw = matmul_at_b(a_prev, delta);
    auto g_w = grad.segment(*wd);
    for (size_t i = 0; i < dw.data().size(); ++i) g_w[i] = dw.data()[i];
    auto g_b = grad.segment(*bd);
    for (size_t i = 0; i < batch; ++i) {
      const double* di = delta.row(i);
      for (size_t j = 0; j < fan_out; ++j) g_b[j] += di[j];
    }
    if (l > 0) {
      delta = linear_backward_input(delta, params.segment(*wd), fan_in, fan_out);
    }
  }

  if (weight_decay > 0.0) {
    for (const auto& seg : layout_->segments()) {
      if (scope == L2Scope::WeightsOnly && seg.kind != SegmentKind::Weight) continue;
      auto g = grad.segment(seg);
      auto v = params.segment(seg);
      for (size_t i = 0; i < g.size(); ++i) g[i] += weight_decay * v[i];
    }
  }
  return out;
}

ParamVector init_params(const Architecture& arch, uint64_t seed, InitScheme scheme) {
  (void)scheme;  // he_normal is the only scheme
  LayoutPtr layout = make_layout(arch);
  ParamVector params(layout);
  Rng rng(seed);
  for (const auto& seg : layout->segments()) {
    auto vals = params.segment(seg);
    switch (seg.kind) {
      case SegmentKind::Weight: {
        const double sigma = std::sqrt(2.0 / static_cast<double>(seg.shape[0]));
        for (auto& v : vals) v = sigma * rng.normal();
        break;
      }
      case SegmentKind::Bias:
      case SegmentKind::BnBeta:
        for (auto& v : vals) v = 0.0;
        break;
      case SegmentKind::BnGamma:
        for (auto& v : vals) v = 1.0;
        break;
    }
  }
  return params;
}

}  // namespace sllb
