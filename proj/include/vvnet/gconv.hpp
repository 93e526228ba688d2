#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/group.hpp"
#include "vvnet/nn.hpp"
#include "vvnet/tensor.hpp"

namespace vvnet {

// Cubic 3D filter bank: weights (K, K, K, Cin, Cout) + bias (Cout).
// Spatial axes are ordered (d, h, w) like feature maps; index (d, h, w)
// corresponds to the lattice point (x=w, y=h, z=d) the group acts on.
template <class S>
struct FilterBank {
  Tensor<S> weights;
  Tensor<S> bias;

  int kernel() const { return weights.dim(0); }
  int in_channels() const { return weights.dim(3); }
  int out_channels() const { return weights.dim(4); }

  void validate() const {
    require(weights.rank() == 5, ErrorCategory::shape, "filter bank weights must be rank 5");
    require(weights.dim(0) == weights.dim(1) && weights.dim(1) == weights.dim(2),
            ErrorCategory::shape, "filter bank kernel must be cubic");
    require(bias.rank() == 1 && bias.dim(0) == weights.dim(4), ErrorCategory::shape,
            "filter bank bias must be (Cout)");
  }
};

namespace detail {

// Applies the rotation block of g to a spatial index of an n^3 cube about
// its center. Doubled coordinates keep even n exact; the result is a
// bijection of the index cube for any signed permutation block.
inline std::array<int, 3> apply_centered(const group::GroupElement& g,
                                         const std::array<int, 3>& dhw, int n) {
  const int u[3] = {2 * dhw[2] - (n - 1), 2 * dhw[1] - (n - 1), 2 * dhw[0] - (n - 1)};  // x,y,z
  int v[3];
  for (int i = 0; i < 3; ++i)
    v[i] = g.at(i, 0) * u[0] + g.at(i, 1) * u[1] + g.at(i, 2) * u[2];
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const int doubled = v[i] + (n - 1);
    require(doubled % 2 == 0 && doubled >= 0 && doubled < 2 * n, ErrorCategory::domain,
            "index transform left the cube; element is not a pure stabilizer rotation");
    out[static_cast<std::size_t>(2 - i)] = doubled / 2;  // x,y,z back to (d,h,w)
  }
  return out;
}

// perm[flat(out_index)] = flat(h applied to out_index), n^3 cube.
inline std::vector<std::int64_t> index_permutation(const group::GroupElement& h, int n) {
  std::vector<std::int64_t> perm(static_cast<std::size_t>(n) * n * n);
  std::int64_t o = 0;
  for (int d = 0; d < n; ++d)
    for (int hh = 0; hh < n; ++hh)
      for (int w = 0; w < n; ++w, ++o) {
        const auto s = apply_centered(h, {d, hh, w}, n);
        perm[static_cast<std::size_t>(o)] = (static_cast<std::int64_t>(s[0]) * n + s[1]) * n + s[2];
      }
  return perm;
}

inline void check_stabilizer_element(const group::GroupElement& g) {
  require(g.has_zero_translation(), ErrorCategory::domain,
          "filter transform requires zero translation");
  require(group::is_signed_permutation(g), ErrorCategory::domain,
          "filter transform requires a signed-permutation rotation block");
}

}  // namespace detail

// Spatial index permutation output[idx] = input[g^-1 (idx - c) + c]; channels
// and bias untouched. Exact bijection, no interpolation.
template <class S>
inline FilterBank<S> transform_filter(const FilterBank<S>& bank, const group::GroupElement& g) {
  bank.validate();
  detail::check_stabilizer_element(g);
  const int K = bank.kernel();
  const std::int64_t cc = static_cast<std::int64_t>(bank.in_channels()) * bank.out_channels();
  const auto perm = detail::index_permutation(group::inverse(g), K);

  FilterBank<S> out;
  out.weights = Tensor<S>::zeros(bank.weights.shape);
  out.bias = bank.bias;
  for (std::size_t o = 0; o < perm.size(); ++o) {
    const S* src = bank.weights.values.data() + perm[o] * cc;
    S* dst = out.weights.values.data() + static_cast<std::int64_t>(o) * cc;
    for (std::int64_t j = 0; j < cc; ++j) dst[j] = src[j];
  }
  return out;
}

// (T_g x)[u] = x[g u] about the cube center; requires cubic spatial dims.
template <class S>
inline Tensor<S> transform_feature_map(const Tensor<S>& x, const group::GroupElement& g) {
  require(x.rank() == 5, ErrorCategory::shape, "transform_feature_map: need (B,N,N,N,C)");
  require(x.dim(1) == x.dim(2) && x.dim(2) == x.dim(3), ErrorCategory::shape,
          "transform_feature_map: spatial dims must be cubic");
  detail::check_stabilizer_element(g);
  const int B = x.dim(0), N = x.dim(1), C = x.dim(4);
  const auto perm = detail::index_permutation(g, N);
  Tensor<S> out(x.shape);
  const std::int64_t cube = static_cast<std::int64_t>(N) * N * N;
  for (int b = 0; b < B; ++b) {
    const S* xb = x.values.data() + static_cast<std::int64_t>(b) * cube * C;
    S* ob = out.values.data() + static_cast<std::int64_t>(b) * cube * C;
    for (std::int64_t o = 0; o < cube; ++o) {
      const S* src = xb + perm[static_cast<std::size_t>(o)] * C;
      S* dst = ob + o * C;
      for (int c = 0; c < C; ++c) dst[c] = src[c];
    }
  }
  return out;
}

// Lifting convolution output: channel axis is P blocks of Cout, block p
// produced by the filter transformed with stabilizer element p.
template <class S>
struct LiftedFeatureMap {
  Tensor<S> values;  // (B, D-K+1, H-K+1, W-K+1, P*Cout)
  group::StabilizerSet stabilizer;

  int block_channels() const {
    return values.dim(4) / stabilizer.size();
  }
};

template <class S>
inline LiftedFeatureMap<S> lift_gconv3d(const Tensor<S>& input, const FilterBank<S>& bank,
                                        const group::StabilizerSet& stab) {
  bank.validate();
  require(stab.size() >= 1, ErrorCategory::domain, "empty stabilizer set");
  const auto oshape = conv3d_output_shape(input, bank.weights);
  const int P = stab.size(), Co = bank.out_channels();

  LiftedFeatureMap<S> out;
  out.stabilizer = stab;
  out.values = Tensor<S>::zeros({oshape[0], oshape[1], oshape[2], oshape[3], P * Co});
  const std::int64_t positions = static_cast<std::int64_t>(oshape[0]) * oshape[1] * oshape[2] * oshape[3];
  for (int p = 0; p < P; ++p) {
    const FilterBank<S> tf = transform_filter(bank, stab.elements[static_cast<std::size_t>(p)]);
    const Tensor<S> block = conv3d_valid(input, tf.weights, tf.bias);
    for (std::int64_t pos = 0; pos < positions; ++pos) {
      const S* src = block.values.data() + pos * Co;
      S* dst = out.values.data() + pos * (static_cast<std::int64_t>(P) * Co) + static_cast<std::int64_t>(p) * Co;
      for (int c = 0; c < Co; ++c) dst[c] = src[c];
    }
  }
  return out;
}

// Exact reverse-mode gradients of lift_gconv3d. Filter gradients flow back
// through the inverse of each block's index permutation; the shared bias
// accumulates over all blocks. Non-null outputs must be pre-shaped and are
// accumulated into.
template <class S>
inline void backward_lift_gconv3d(const Tensor<S>& input, const FilterBank<S>& bank,
                                  const group::StabilizerSet& stab, const Tensor<S>& grad_out,
                                  Tensor<S>* grad_input, Tensor<S>* grad_weights,
                                  Tensor<S>* grad_bias) {
  bank.validate();
  const auto oshape = conv3d_output_shape(input, bank.weights);
  const int P = stab.size(), Co = bank.out_channels(), K = bank.kernel();
  require(grad_out.shape ==
              std::vector<int>({oshape[0], oshape[1], oshape[2], oshape[3], P * Co}),
          ErrorCategory::shape, "backward_lift_gconv3d: bad upstream shape");
  const std::int64_t positions = static_cast<std::int64_t>(oshape[0]) * oshape[1] * oshape[2] * oshape[3];
  const std::int64_t cc = static_cast<std::int64_t>(bank.in_channels()) * Co;

  Tensor<S> gblock({oshape[0], oshape[1], oshape[2], oshape[3], Co});
  for (int p = 0; p < P; ++p) {
    for (std::int64_t pos = 0; pos < positions; ++pos) {
      const S* src = grad_out.values.data() + pos * (static_cast<std::int64_t>(P) * Co) + static_cast<std::int64_t>(p) * Co;
      S* dst = gblock.values.data() + pos * Co;
      for (int c = 0; c < Co; ++c) dst[c] = src[c];
    }
    const group::GroupElement& g = stab.elements[static_cast<std::size_t>(p)];
    const FilterBank<S> tf = transform_filter(bank, g);
    Tensor<S> gw_transformed;
    if (grad_weights) gw_transformed = Tensor<S>::zeros(bank.weights.shape);
    conv3d_valid_backward(input, tf.weights, gblock, grad_input,
                          grad_weights ? &gw_transformed : nullptr, grad_bias);
    if (grad_weights) {
      const auto perm = detail::index_permutation(group::inverse(g), K);
      for (std::size_t o = 0; o < perm.size(); ++o) {
        const S* src = gw_transformed.values.data() + static_cast<std::int64_t>(o) * cc;
        S* dst = grad_weights->values.data() + perm[o] * cc;
        for (std::int64_t j = 0; j < cc; ++j) dst[j] += src[j];
      }
    }
  }
}

// Reference lattice action for the equivariance identity: block p of the
// result reads from block index(g * g_p), spatially transformed by g.
template <class S>
inline LiftedFeatureMap<S> apply_g_to_output(const LiftedFeatureMap<S>& map,
                                             const group::GroupElement& g) {
  const int P = map.stabilizer.size();
  const int Co = map.block_channels();
  LiftedFeatureMap<S> out;
  out.stabilizer = map.stabilizer;
  out.values = Tensor<S>::zeros(map.values.shape);
  const int B = map.values.dim(0), N = map.values.dim(1);
  require(map.values.dim(2) == N && map.values.dim(3) == N, ErrorCategory::shape,
          "apply_g_to_output: spatial dims must be cubic");
  const auto perm = detail::index_permutation(g, N);
  const std::int64_t cube = static_cast<std::int64_t>(N) * N * N;
  const std::int64_t stride_c = static_cast<std::int64_t>(P) * Co;
  for (int p = 0; p < P; ++p) {
    const int q = map.stabilizer.index_of(
        group::compose(g, map.stabilizer.elements[static_cast<std::size_t>(p)]));
    require(q >= 0, ErrorCategory::domain, "apply_g_to_output: composed element not in stabilizer");
    for (int b = 0; b < B; ++b)
      for (std::int64_t o = 0; o < cube; ++o) {
        const S* src = map.values.values.data() +
                       (static_cast<std::int64_t>(b) * cube + perm[static_cast<std::size_t>(o)]) * stride_c +
                       static_cast<std::int64_t>(q) * Co;
        S* dst = out.values.values.data() +
                 (static_cast<std::int64_t>(b) * cube + o) * stride_c + static_cast<std::int64_t>(p) * Co;
        for (int c = 0; c < Co; ++c) dst[c] = src[c];
      }
  }
  return out;
}

}  // namespace vvnet
