#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/io.hpp"
#include "vvnet/nn.hpp"
#include "vvnet/tensor.hpp"
#include "vvnet/voxelizer.hpp"

namespace vvnet {

// Per-voxel posterior means, shape (D, H, W, l).
template <class S>
struct LatentGrid {
  Tensor<S> values;
};

// Encoder k^3 -> hidden -> (mu, logvar); decoder l -> hidden -> k^3.
template <class S>
struct VaeModel {
  int k = 4;
  int latent = 8;
  int hidden = 128;

  Mlp<S> encoder_body;  // k^3 -> hidden, relu
  Parameter<S> mu_w, mu_b;
  Parameter<S> logvar_w, logvar_b;
  Mlp<S> decoder_body;  // latent -> hidden, relu
  Parameter<S> out_w, out_b;

  int block_size() const { return k * k * k; }

  std::vector<Parameter<S>*> parameters() {
    std::vector<Parameter<S>*> out = encoder_body.params();
    out.push_back(&mu_w);
    out.push_back(&mu_b);
    out.push_back(&logvar_w);
    out.push_back(&logvar_b);
    for (auto* p : decoder_body.params()) out.push_back(p);
    out.push_back(&out_w);
    out.push_back(&out_b);
    return out;
  }
};

template <class S>
inline VaeModel<S> make_vae(int k, int latent, int hidden, Rng& rng) {
  require(k >= 1 && latent >= 1 && hidden >= 1, ErrorCategory::config, "bad VAE sizes");
  VaeModel<S> m;
  m.k = k;
  m.latent = latent;
  m.hidden = hidden;
  const int in = k * k * k;
  m.encoder_body = make_mlp<S>("vae/enc", {in, hidden}, true, rng);
  Tensor<S> mw({hidden, latent});
  glorot_fill(mw, hidden, latent, rng);
  m.mu_w = Parameter<S>("vae/mu.w", std::move(mw));
  m.mu_b = Parameter<S>("vae/mu.b", Tensor<S>::zeros({latent}));
  Tensor<S> lw({hidden, latent});
  glorot_fill(lw, hidden, latent, rng);
  m.logvar_w = Parameter<S>("vae/logvar.w", std::move(lw));
  m.logvar_b = Parameter<S>("vae/logvar.b", Tensor<S>::zeros({latent}));
  m.decoder_body = make_mlp<S>("vae/dec", {latent, hidden}, true, rng);
  Tensor<S> ow({hidden, in});
  glorot_fill(ow, hidden, in, rng);
  m.out_w = Parameter<S>("vae/out.w", std::move(ow));
  m.out_b = Parameter<S>("vae/out.b", Tensor<S>::zeros({in}));
  return m;
}

// blocks: (..., k^3) rows; returns (mu, logvar) of shape (..., l).
template <class S>
inline std::pair<Tensor<S>, Tensor<S>> vae_encode(const VaeModel<S>& m, const Tensor<S>& blocks) {
  require(blocks.shape.back() == m.block_size(), ErrorCategory::shape,
          "vae_encode: block width does not match model k^3");
  const Tensor<S> h = m.encoder_body.forward(blocks);
  return {linear(h, m.mu_w.value, m.mu_b.value), linear(h, m.logvar_w.value, m.logvar_b.value)};
}

template <class S>
inline Tensor<S> vae_decode(const VaeModel<S>& m, const Tensor<S>& z) {
  require(z.shape.back() == m.latent, ErrorCategory::shape, "vae_decode: latent width mismatch");
  const Tensor<S> h = m.decoder_body.forward(z);
  return linear(h, m.out_w.value, m.out_b.value);
}

// z = mu + exp(logvar / 2) * noise, elementwise.
template <class S>
inline Tensor<S> reparameterize(const Tensor<S>& mu, const Tensor<S>& logvar,
                                const Tensor<S>& noise) {
  require(mu.shape == logvar.shape && mu.shape == noise.shape, ErrorCategory::shape,
          "reparameterize: shape mismatch");
  Tensor<S> z(mu.shape);
  for (std::size_t i = 0; i < z.values.size(); ++i)
    z.values[i] = mu.values[i] + std::exp(logvar.values[i] / S(2)) * noise.values[i];
  return z;
}

// KL(N(mu, sigma^2) || N(0, 1)) = 1/2 sum(mu^2 + sigma^2 - 1 - log sigma^2),
// summed over the latent dimensions of one row.
template <class S>
inline double kl_standard_normal(const S* mu, const S* logvar, int l) {
  double kl = 0.0;
  for (int i = 0; i < l; ++i) {
    const double m = static_cast<double>(mu[i]);
    const double lv = static_cast<double>(logvar[i]);
    kl += m * m + std::exp(lv) - 1.0 - lv;
  }
  return 0.5 * kl;
}

struct ElboParts {
  double loss = 0.0;   // recon + kl
  double recon = 0.0;  // mean squared error over the block entries
  double kl = 0.0;
};

// Evaluates the two-term bound (squared-error reconstruction under a
// Gaussian decoder + closed-form KL to the standard-normal prior) for a
// batch of rows, averaging parts over the batch. When train is set,
// parameter gradients of the batch-mean loss are accumulated.
template <class S>
inline ElboParts elbo_loss(VaeModel<S>& m, const Tensor<S>& blocks, const Tensor<S>& noise,
                           bool train = false) {
  const int bs = static_cast<int>(blocks.numel() / m.block_size());
  const int in = m.block_size(), l = m.latent;
  require(noise.numel() == static_cast<std::int64_t>(bs) * l, ErrorCategory::shape,
          "elbo_loss: noise shape mismatch");

  std::vector<Tensor<S>> enc_cache, dec_cache;
  const Tensor<S> h = m.encoder_body.forward(blocks, train ? &enc_cache : nullptr);
  const Tensor<S> mu = linear(h, m.mu_w.value, m.mu_b.value);
  const Tensor<S> logvar = linear(h, m.logvar_w.value, m.logvar_b.value);
  const Tensor<S> z = reparameterize(mu, logvar, noise);
  const Tensor<S> hd = m.decoder_body.forward(z, train ? &dec_cache : nullptr);
  const Tensor<S> xhat = linear(hd, m.out_w.value, m.out_b.value);

  ElboParts parts;
  for (std::int64_t i = 0; i < xhat.numel(); ++i) {
    const double d = static_cast<double>(xhat[i]) - static_cast<double>(blocks[i]);
    parts.recon += d * d;
  }
  parts.recon /= static_cast<double>(in) * bs;
  for (int r = 0; r < bs; ++r)
    parts.kl += kl_standard_normal(mu.values.data() + static_cast<std::int64_t>(r) * l,
                                   logvar.values.data() + static_cast<std::int64_t>(r) * l, l);
  parts.kl /= bs;
  parts.loss = parts.recon + parts.kl;

  if (!train) return parts;

  // reconstruction gradient
  Tensor<S> g_xhat(xhat.shape);
  const double rscale = 2.0 / (static_cast<double>(in) * bs);
  for (std::int64_t i = 0; i < xhat.numel(); ++i)
    g_xhat[i] = static_cast<S>((static_cast<double>(xhat[i]) - static_cast<double>(blocks[i])) * rscale);

  m.out_w.value.ensure_grad();
  m.out_b.value.ensure_grad();
  Tensor<S> g_hd = Tensor<S>::zeros(hd.shape);
  Tensor<S> gw(m.out_w.value.shape), gb(m.out_b.value.shape);
  linear_backward(hd, m.out_w.value, g_xhat, &g_hd, &gw, &gb);
  for (std::size_t i = 0; i < gw.values.size(); ++i) m.out_w.value.grad[i] += gw.values[i];
  for (std::size_t i = 0; i < gb.values.size(); ++i) m.out_b.value.grad[i] += gb.values[i];

  const Tensor<S> g_z = m.decoder_body.backward(dec_cache, g_hd, true);

  // combine the reparameterization path with the KL closed-form gradient
  Tensor<S> g_mu(mu.shape), g_lv(logvar.shape);
  const double kscale = 1.0 / bs;
  for (std::int64_t i = 0; i < mu.numel(); ++i) {
    const double gz = static_cast<double>(g_z[i]);
    const double lv = static_cast<double>(logvar[i]);
    g_mu[i] = static_cast<S>(gz + kscale * static_cast<double>(mu[i]));
    g_lv[i] = static_cast<S>(gz * static_cast<double>(noise[i]) * 0.5 * std::exp(lv / 2.0) +
                             kscale * 0.5 * (std::exp(lv) - 1.0));
  }

  m.mu_w.value.ensure_grad();
  m.mu_b.value.ensure_grad();
  m.logvar_w.value.ensure_grad();
  m.logvar_b.value.ensure_grad();
  Tensor<S> g_h = Tensor<S>::zeros(h.shape);
  Tensor<S> gmw(m.mu_w.value.shape), gmb(m.mu_b.value.shape);
  linear_backward(h, m.mu_w.value, g_mu, &g_h, &gmw, &gmb);
  for (std::size_t i = 0; i < gmw.values.size(); ++i) m.mu_w.value.grad[i] += gmw.values[i];
  for (std::size_t i = 0; i < gmb.values.size(); ++i) m.mu_b.value.grad[i] += gmb.values[i];
  Tensor<S> glw(m.logvar_w.value.shape), glb(m.logvar_b.value.shape);
  linear_backward(h, m.logvar_w.value, g_lv, &g_h, &glw, &glb);
  for (std::size_t i = 0; i < glw.values.size(); ++i) m.logvar_w.value.grad[i] += glw.values[i];
  for (std::size_t i = 0; i < glb.values.size(); ++i) m.logvar_b.value.grad[i] += glb.values[i];

  m.encoder_body.backward(enc_cache, g_h, false);
  return parts;
}

struct VaeTrainConfig {
  int epochs = 10;
  double lr = 1e-3;
  int batch = 64;
  std::uint64_t seed = 1;
};

struct VaeEpochStats {
  double mean_loss = 0.0;
  double mean_recon = 0.0;
  double mean_kl = 0.0;
};

// Minimizes the bound with adam over shuffled minibatches. Fully
// deterministic given the seed: same seed, same data -> identical
// parameters.
template <class S>
inline std::vector<VaeEpochStats> train_vae(VaeModel<S>& model, const Tensor<S>& dataset,
                                            const VaeTrainConfig& cfg) {
  require(dataset.rank() == 2 && dataset.dim(1) == model.block_size(), ErrorCategory::shape,
          "train_vae: dataset must be (N, k^3)");
  const int n = dataset.dim(0);
  require(n >= 1, ErrorCategory::domain, "train_vae: empty dataset");
  require(cfg.epochs >= 1 && cfg.batch >= 1 && cfg.lr >= 0.0, ErrorCategory::config,
          "train_vae: bad training config");

  Rng rng(cfg.seed);
  AdamConfig adam;
  adam.lr = cfg.lr;
  auto params = model.parameters();
  const int in = model.block_size(), l = model.latent;

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  std::vector<VaeEpochStats> history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    VaeEpochStats stats;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int bs = std::min(cfg.batch, n - start);
      Tensor<S> batch({bs, in});
      for (int r = 0; r < bs; ++r) {
        const int src = order[static_cast<std::size_t>(start + r)];
        std::copy_n(dataset.values.data() + static_cast<std::int64_t>(src) * in, in,
                    batch.values.data() + static_cast<std::int64_t>(r) * in);
      }
      Tensor<S> noise({bs, l});
      for (auto& v : noise.values) v = static_cast<S>(rng.normal());

      zero_grads(params);
      const ElboParts parts = elbo_loss(model, batch, noise, true);
      require(std::isfinite(parts.loss), ErrorCategory::domain, "train_vae: non-finite loss");
      if (cfg.lr > 0.0)
        for (auto* p : params) adam_step(*p, adam);

      stats.mean_loss += parts.loss;
      stats.mean_recon += parts.recon;
      stats.mean_kl += parts.kl;
      ++batches;
    }
    stats.mean_loss /= batches;
    stats.mean_recon /= batches;
    stats.mean_kl /= batches;
    history.push_back(stats);
  }
  return history;
}

// Deterministic inference: the stored code is the posterior mean; all-zero
// blocks reuse one cached encoding of the zero block.
template <class S>
inline LatentGrid<S> encode_grid(const SubvoxelTensor& sub, const VaeModel<S>& model) {
  require(sub.spec.k == model.k, ErrorCategory::shape,
          "encode_grid: grid k does not match VAE k");
  const int in = model.block_size(), l = model.latent;
  const std::int64_t voxels = sub.spec.voxel_count();

  LatentGrid<S> grid;
  grid.values = Tensor<S>::zeros({sub.spec.D, sub.spec.H, sub.spec.W, l});

  Tensor<S> zero_mu;
  bool zero_cached = false;
  Tensor<S> row({1, in});
  for (std::int64_t v = 0; v < voxels; ++v) {
    const double* blk = sub.values.data() + v * in;
    bool all_zero = true;
    for (int i = 0; i < in; ++i)
      if (blk[i] != 0.0) {
        all_zero = false;
        break;
      }
    S* dst = grid.values.values.data() + v * l;
    if (all_zero) {
      if (!zero_cached) {
        Tensor<S> zrow({1, in});
        zero_mu = vae_encode(model, zrow).first;
        zero_cached = true;
      }
      std::copy_n(zero_mu.values.data(), l, dst);
      continue;
    }
    for (int i = 0; i < in; ++i) row.values[static_cast<std::size_t>(i)] = static_cast<S>(blk[i]);
    const Tensor<S> mu = vae_encode(model, row).first;
    std::copy_n(mu.values.data(), l, dst);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Checkpoint layout for VAE models: one named tensor per parameter plus a
// meta tensor with the sizes.

template <class S>
inline void load_param(const Checkpoint& ck, Parameter<S>& p) {
  Tensor<S> t = ck.get_tensor<S>(p.name);
  require(t.shape == p.value.shape, ErrorCategory::parse,
          "checkpoint tensor shape mismatch for " + p.name + ": file has " + shape_str(t.shape) +
              ", model needs " + shape_str(p.value.shape));
  p.value = std::move(t);
}

template <class S>
inline void vae_to_checkpoint(VaeModel<S>& m, Checkpoint& ck) {
  ck.add_scalars("vae/meta", {static_cast<float>(m.k), static_cast<float>(m.latent),
                              static_cast<float>(m.hidden)});
  for (const auto* p : m.parameters()) ck.add_tensor(p->name, p->value);
}

template <class S>
inline VaeModel<S> vae_from_checkpoint(const Checkpoint& ck) {
  const NamedTensor& meta = ck.get("vae/meta");
  require(meta.values.size() == 3, ErrorCategory::parse, "bad vae meta tensor");
  Rng rng(0);
  VaeModel<S> m = make_vae<S>(static_cast<int>(meta.values[0]), static_cast<int>(meta.values[1]),
                              static_cast<int>(meta.values[2]), rng);
  for (auto* p : m.parameters()) load_param(ck, *p);
  return m;
}

}  // namespace vvnet
