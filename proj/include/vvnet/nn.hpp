#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/tensor.hpp"

namespace vvnet {

// Trainable tensor with adaptive-moment state. Gradients accumulate into
// value.grad; adam_step consumes them.
template <class S>
struct Parameter {
  std::string name;
  Tensor<S> value;
  Tensor<S> moment1, moment2;
  std::int64_t step = 0;

  Parameter() = default;
  Parameter(std::string n, Tensor<S> v) : name(std::move(n)), value(std::move(v)) {
    value.ensure_grad();
    moment1 = Tensor<S>::zeros(value.shape);
    moment2 = Tensor<S>::zeros(value.shape);
  }
};

template <class S>
inline void glorot_fill(Tensor<S>& t, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.values) v = static_cast<S>(rng.uniform(-bound, bound));
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment update; deterministic given state.
template <class S>
inline void adam_step(Parameter<S>& p, const AdamConfig& cfg) {
  p.value.ensure_grad();
  p.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
  for (std::size_t i = 0; i < p.value.values.size(); ++i) {
    const double g = static_cast<double>(p.value.grad[i]);
    const double m = cfg.beta1 * static_cast<double>(p.moment1.values[i]) + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * static_cast<double>(p.moment2.values[i]) + (1.0 - cfg.beta2) * g * g;
    p.moment1.values[i] = static_cast<S>(m);
    p.moment2.values[i] = static_cast<S>(v);
    const double mhat = m / c1;
    const double vhat = v / c2;
    p.value.values[i] -= static_cast<S>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

template <class S>
inline void zero_grads(const std::vector<Parameter<S>*>& params) {
  for (auto* p : params) p->value.zero_grad();
}

// ---------------------------------------------------------------------------
// linear: y[r, o] = b[o] + sum_i x[r, i] W[i, o], rows = leading dims of x.

template <class S>
inline Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& W, const Tensor<S>& b) {
  require(W.rank() == 2, ErrorCategory::shape, "linear: weight must be rank 2");
  const int in = W.dim(0), out = W.dim(1);
  require(x.rank() >= 1 && x.shape.back() == in, ErrorCategory::shape,
          "linear: input width " + shape_str(x.shape) + " does not match weight " + shape_str(W.shape));
  if (b.numel()) check_shape(b, {out}, "linear bias");
  const std::int64_t rows = x.numel() / in;

  std::vector<int> out_shape = x.shape;
  out_shape.back() = out;
  Tensor<S> y(out_shape);
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* xr = x.values.data() + r * in;
    S* yr = y.values.data() + r * out;
    if (b.numel())
      for (int o = 0; o < out; ++o) yr[o] = b.values[static_cast<std::size_t>(o)];
    for (int i = 0; i < in; ++i) {
      const S xv = xr[i];
      const S* wrow = W.values.data() + static_cast<std::int64_t>(i) * out;
      for (int o = 0; o < out; ++o) yr[o] += xv * wrow[o];
    }
  }
  return y;
}

// Accumulates into any non-null gradient tensors (shapes must already match).
template <class S>
inline void linear_backward(const Tensor<S>& x, const Tensor<S>& W, const Tensor<S>& grad_y,
                            Tensor<S>* grad_x, Tensor<S>* grad_W, Tensor<S>* grad_b) {
  const int in = W.dim(0), out = W.dim(1);
  const std::int64_t rows = x.numel() / in;
  require(grad_y.numel() == rows * out, ErrorCategory::shape, "linear_backward: bad upstream shape");
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* xr = x.values.data() + r * in;
    const S* gy = grad_y.values.data() + r * out;
    if (grad_b)
      for (int o = 0; o < out; ++o) grad_b->values[static_cast<std::size_t>(o)] += gy[o];
    for (int i = 0; i < in; ++i) {
      const S* wrow = W.values.data() + static_cast<std::int64_t>(i) * out;
      S acc = S(0);
      for (int o = 0; o < out; ++o) acc += gy[o] * wrow[o];
      if (grad_x) grad_x->values[static_cast<std::size_t>(r * in + i)] += acc;
      if (grad_W) {
        S* gw = grad_W->values.data() + static_cast<std::int64_t>(i) * out;
        const S xv = xr[i];
        for (int o = 0; o < out; ++o) gw[o] += xv * gy[o];
      }
    }
  }
}

template <class S>
inline Tensor<S> relu(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (auto& v : y.values) v = std::max(v, S(0));
  return y;
}

template <class S>
inline void relu_backward(const Tensor<S>& x, const Tensor<S>& grad_y, Tensor<S>* grad_x) {
  for (std::size_t i = 0; i < x.values.size(); ++i)
    if (x.values[i] > S(0)) grad_x->values[i] += grad_y.values[i];
}

// ---------------------------------------------------------------------------
// Valid (no padding, stride 1) 3D cross-correlation.
// input (B, D, H, W, Cin), weights (K, K, K, Cin, Cout), bias (Cout).

template <class S>
inline std::vector<int> conv3d_output_shape(const Tensor<S>& input, const Tensor<S>& w) {
  require(input.rank() == 5, ErrorCategory::shape, "conv3d: input must be rank 5 (B,D,H,W,C)");
  require(w.rank() == 5, ErrorCategory::shape, "conv3d: weights must be rank 5 (K,K,K,Cin,Cout)");
  const int K = w.dim(0);
  require(w.dim(1) == K && w.dim(2) == K, ErrorCategory::shape, "conv3d: kernel must be cubic");
  require(w.dim(3) == input.dim(4), ErrorCategory::shape, "conv3d: channel mismatch");
  require(input.dim(1) >= K && input.dim(2) >= K && input.dim(3) >= K, ErrorCategory::shape,
          "conv3d: spatial dims smaller than kernel");
  return {input.dim(0), input.dim(1) - K + 1, input.dim(2) - K + 1, input.dim(3) - K + 1, w.dim(4)};
}

template <class S>
inline Tensor<S> conv3d_valid(const Tensor<S>& input, const Tensor<S>& w, const Tensor<S>& bias) {
  Tensor<S> out(conv3d_output_shape(input, w));
  const int B = input.dim(0), D = input.dim(1), H = input.dim(2), Wd = input.dim(3), Ci = input.dim(4);
  const int K = w.dim(0), Co = w.dim(4);
  const int OD = out.dim(1), OH = out.dim(2), OW = out.dim(3);
  if (bias.numel()) check_shape(bias, {Co}, "conv3d bias");

  const std::int64_t in_sb = static_cast<std::int64_t>(D) * H * Wd * Ci;
  const std::int64_t in_sd = static_cast<std::int64_t>(H) * Wd * Ci;
  const std::int64_t in_sh = static_cast<std::int64_t>(Wd) * Ci;
  for (int b = 0; b < B; ++b)
    for (int od = 0; od < OD; ++od)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          S* op = out.values.data() +
                  (((static_cast<std::int64_t>(b) * OD + od) * OH + oh) * OW + ow) * Co;
          if (bias.numel())
            for (int co = 0; co < Co; ++co) op[co] = bias.values[static_cast<std::size_t>(co)];
          const S* wp = w.values.data();
          for (int kd = 0; kd < K; ++kd)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw) {
                const S* ip = input.values.data() + b * in_sb + (od + kd) * in_sd +
                              (oh + kh) * in_sh + (ow + kw) * Ci;
                for (int ci = 0; ci < Ci; ++ci, wp += Co) {
                  const S xv = ip[ci];
                  if (xv == S(0)) continue;
                  for (int co = 0; co < Co; ++co) op[co] += xv * wp[co];
                }
              }
        }
  return out;
}

template <class S>
inline void conv3d_valid_backward(const Tensor<S>& input, const Tensor<S>& w,
                                  const Tensor<S>& grad_out, Tensor<S>* grad_input,
                                  Tensor<S>* grad_w, Tensor<S>* grad_bias) {
  const auto want = conv3d_output_shape(input, w);
  require(grad_out.shape == want, ErrorCategory::shape, "conv3d_backward: bad upstream shape");
  const int B = input.dim(0), D = input.dim(1), H = input.dim(2), Wd = input.dim(3), Ci = input.dim(4);
  const int K = w.dim(0), Co = w.dim(4);
  const int OD = want[1], OH = want[2], OW = want[3];

  const std::int64_t in_sb = static_cast<std::int64_t>(D) * H * Wd * Ci;
  const std::int64_t in_sd = static_cast<std::int64_t>(H) * Wd * Ci;
  const std::int64_t in_sh = static_cast<std::int64_t>(Wd) * Ci;
  for (int b = 0; b < B; ++b)
    for (int od = 0; od < OD; ++od)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const S* gp = grad_out.values.data() +
                        (((static_cast<std::int64_t>(b) * OD + od) * OH + oh) * OW + ow) * Co;
          if (grad_bias)
            for (int co = 0; co < Co; ++co)
              grad_bias->values[static_cast<std::size_t>(co)] += gp[co];
          const S* wp = w.values.data();
          S* gwp = grad_w ? grad_w->values.data() : nullptr;
          for (int kd = 0; kd < K; ++kd)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw) {
                const std::int64_t in_off = b * in_sb + (od + kd) * in_sd + (oh + kh) * in_sh +
                                            (ow + kw) * Ci;
                const S* ip = input.values.data() + in_off;
                S* gip = grad_input ? grad_input->values.data() + in_off : nullptr;
                for (int ci = 0; ci < Ci; ++ci, wp += Co, gwp += grad_w ? Co : 0) {
                  S gx = S(0);
                  for (int co = 0; co < Co; ++co) {
                    const S g = gp[co];
                    gx += g * wp[co];
                    if (gwp) gwp[co] += ip[ci] * g;
                  }
                  if (gip) gip[ci] += gx;
                }
              }
        }
}

// ---------------------------------------------------------------------------
// Columnwise max over points; permutation invariant.

template <class S>
inline Tensor<S> max_pool_points(const Tensor<S>& f) {
  require(f.rank() == 2, ErrorCategory::shape, "max_pool_points: input must be (n, c)");
  const int n = f.dim(0), c = f.dim(1);
  require(n >= 1, ErrorCategory::domain, "max_pool_points: empty input");
  Tensor<S> out({c});
  for (int j = 0; j < c; ++j) out.values[static_cast<std::size_t>(j)] = f.values[static_cast<std::size_t>(j)];
  for (int i = 1; i < n; ++i) {
    const S* row = f.values.data() + static_cast<std::int64_t>(i) * c;
    for (int j = 0; j < c; ++j)
      if (row[j] > out.values[static_cast<std::size_t>(j)]) out.values[static_cast<std::size_t>(j)] = row[j];
  }
  return out;
}

// Subgradient routed to the first (lowest index) argmax row of each column.
template <class S>
inline void max_pool_points_backward(const Tensor<S>& f, const Tensor<S>& grad_y, Tensor<S>* grad_f) {
  const int n = f.dim(0), c = f.dim(1);
  for (int j = 0; j < c; ++j) {
    int arg = 0;
    S best = f.values[static_cast<std::size_t>(j)];
    for (int i = 1; i < n; ++i) {
      const S v = f.values[static_cast<std::size_t>(static_cast<std::int64_t>(i) * c + j)];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    grad_f->values[static_cast<std::size_t>(static_cast<std::int64_t>(arg) * c + j)] +=
        grad_y.values[static_cast<std::size_t>(j)];
  }
}

// ---------------------------------------------------------------------------
// Mean over points of -log softmax(score)[label], with its gradient.

template <class S>
struct CeResult {
  double loss = 0.0;
  Tensor<S> grad;  // d(loss)/d(scores), same shape as scores
};

template <class S>
inline CeResult<S> softmax_cross_entropy(const Tensor<S>& scores, const std::vector<int>& labels) {
  require(scores.rank() == 2, ErrorCategory::shape, "cross_entropy: scores must be (n, m)");
  const int n = scores.dim(0), m = scores.dim(1);
  require(static_cast<int>(labels.size()) == n, ErrorCategory::shape,
          "cross_entropy: label count mismatch");
  CeResult<S> res;
  res.grad = Tensor<S>::zeros(scores.shape);
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    const int lab = labels[static_cast<std::size_t>(r)];
    require(lab >= 0 && lab < m, ErrorCategory::domain,
            "cross_entropy: label " + std::to_string(lab) + " out of range [0," + std::to_string(m) + ")");
    const S* sr = scores.values.data() + static_cast<std::int64_t>(r) * m;
    S mx = sr[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, sr[j]);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) sum += std::exp(static_cast<double>(sr[j] - mx));
    const double logsum = static_cast<double>(mx) + std::log(sum);
    total += logsum - static_cast<double>(sr[lab]);
    S* gr = res.grad.values.data() + static_cast<std::int64_t>(r) * m;
    for (int j = 0; j < m; ++j) {
      const double p = std::exp(static_cast<double>(sr[j]) - logsum);
      gr[j] = static_cast<S>((p - (j == lab ? 1.0 : 0.0)) / n);
    }
  }
  res.loss = total / n;
  return res;
}

// ---------------------------------------------------------------------------
// Stack of linear layers with relu between (and optionally after the last).
// Used for the shared per-point function, trunk dense layers and the head.

template <class S>
struct Mlp {
  std::vector<Parameter<S>> weights;
  std::vector<Parameter<S>> biases;
  bool relu_last = true;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int in_width() const { return weights.front().value.dim(0); }
  int out_width() const { return weights.back().value.dim(1); }

  std::vector<Parameter<S>*> params() {
    std::vector<Parameter<S>*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      out.push_back(&weights[i]);
      out.push_back(&biases[i]);
    }
    return out;
  }

  // cache holds the input followed by each layer's activation output.
  Tensor<S> forward(const Tensor<S>& x, std::vector<Tensor<S>>* cache = nullptr) const {
    Tensor<S> cur = x;
    if (cache) {
      cache->clear();
      cache->push_back(cur);
    }
    for (int i = 0; i < layer_count(); ++i) {
      cur = linear(cur, weights[static_cast<std::size_t>(i)].value, biases[static_cast<std::size_t>(i)].value);
      if (relu_last || i + 1 < layer_count()) cur = relu(cur);
      if (cache) cache->push_back(cur);
    }
    return cur;
  }

  // Accumulates parameter gradients; returns the input gradient when
  // want_input_grad is set.
  Tensor<S> backward(const std::vector<Tensor<S>>& cache, const Tensor<S>& grad_out,
                     bool want_input_grad) {
    Tensor<S> g = grad_out;
    for (int i = layer_count() - 1; i >= 0; --i) {
      const Tensor<S>& activated = cache[static_cast<std::size_t>(i + 1)];
      if (relu_last || i + 1 < layer_count()) {
        Tensor<S> masked = Tensor<S>::zeros(g.shape);
        relu_backward(activated, g, &masked);
        g = std::move(masked);
      }
      const Tensor<S>& x = cache[static_cast<std::size_t>(i)];
      Tensor<S> gx = Tensor<S>::zeros(x.shape);
      weights[static_cast<std::size_t>(i)].value.ensure_grad();
      biases[static_cast<std::size_t>(i)].value.ensure_grad();
      Tensor<S> gw_view = Tensor<S>::zeros(weights[static_cast<std::size_t>(i)].value.shape);
      Tensor<S> gb_view = Tensor<S>::zeros(biases[static_cast<std::size_t>(i)].value.shape);
      linear_backward(x, weights[static_cast<std::size_t>(i)].value, g,
                      (want_input_grad || i > 0) ? &gx : nullptr, &gw_view, &gb_view);
      auto& wgrad = weights[static_cast<std::size_t>(i)].value.grad;
      for (std::size_t j = 0; j < wgrad.size(); ++j) wgrad[j] += gw_view.values[j];
      auto& bgrad = biases[static_cast<std::size_t>(i)].value.grad;
      for (std::size_t j = 0; j < bgrad.size(); ++j) bgrad[j] += gb_view.values[j];
      g = std::move(gx);
    }
    return g;
  }
};

// widths includes the input width, e.g. {3, 64, 64}.
template <class S>
inline Mlp<S> make_mlp(const std::string& name_prefix, const std::vector<int>& widths,
                       bool relu_last, Rng& rng) {
  require(widths.size() >= 2, ErrorCategory::config, "mlp needs at least one layer");
  Mlp<S> mlp;
  mlp.relu_last = relu_last;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Tensor<S> w({widths[i], widths[i + 1]});
    glorot_fill(w, widths[i], widths[i + 1], rng);
    mlp.weights.emplace_back(name_prefix + "." + std::to_string(i) + ".w", std::move(w));
    mlp.biases.emplace_back(name_prefix + "." + std::to_string(i) + ".b",
                            Tensor<S>::zeros({widths[i + 1]}));
  }
  return mlp;
}

}  // namespace vvnet
