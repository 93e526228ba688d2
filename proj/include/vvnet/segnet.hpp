#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/gconv.hpp"
#include "vvnet/group.hpp"
#include "vvnet/io.hpp"
#include "vvnet/metrics.hpp"
#include "vvnet/nn.hpp"
#include "vvnet/pointcloud.hpp"
#include "vvnet/tensor.hpp"
#include "vvnet/vae.hpp"
#include "vvnet/voxelizer.hpp"

namespace vvnet {

enum class AblationMode { full, rbf_vae_only, gconv_occupancy_only, point_only };

inline const char* mode_name(AblationMode m) {
  switch (m) {
    case AblationMode::full: return "full";
    case AblationMode::rbf_vae_only: return "rbf_vae_only";
    case AblationMode::gconv_occupancy_only: return "gconv_occupancy_only";
    case AblationMode::point_only: return "point_only";
  }
  return "?";
}

inline AblationMode mode_from_name(const std::string& s) {
  if (s == "full") return AblationMode::full;
  if (s == "rbf_vae_only") return AblationMode::rbf_vae_only;
  if (s == "gconv_occupancy_only") return AblationMode::gconv_occupancy_only;
  if (s == "point_only") return AblationMode::point_only;
  fail(ErrorCategory::config, "unknown ablation mode: " + s);
}

// Grid settings with sigma expressed as a multiple of the smallest voxel
// size; the absolute kernel width is resolved per cloud from its box.
struct GridConfig {
  int D = 16, H = 16, W = 16, k = 4;
  double sigma_scale = 1.0;
  RbfKernel kernel = RbfKernel::gaussian;
  Combine combine = Combine::max;
  Neighborhood neighborhood = Neighborhood::local;

  GridSpec resolve(const Aabb& box) const {
    GridSpec spec;
    spec.D = D;
    spec.H = H;
    spec.W = W;
    spec.k = k;
    spec.kernel = kernel;
    spec.combine = combine;
    spec.neighborhood = neighborhood;
    spec.sigma = 1.0;  // placeholder so min_voxel_size is valid
    spec.sigma = sigma_scale * min_voxel_size(spec, box);
    spec.validate();
    return spec;
  }
};

struct NetConfig {
  GridConfig grid;
  int latent = 8;
  int vae_hidden = 128;
  std::vector<int> point_widths = {64, 64};  // hidden widths; must end at 64
  int gconv_layers = 2;
  int gconv_kernel = 3;
  int gconv_channels = 8;
  group::Kind group_kind = group::Kind::p4m;
  bool group_dedupe = true;
  int global_width = 256;
  std::vector<int> head_hidden = {64};
  int num_classes = 2;
  AblationMode mode = AblationMode::full;

  bool uses_gconv() const {
    return mode == AblationMode::full || mode == AblationMode::gconv_occupancy_only;
  }
  bool uses_voxel_branch() const { return mode != AblationMode::point_only; }
  bool uses_vae() const {
    return mode == AblationMode::full || mode == AblationMode::rbf_vae_only;
  }

  // spatial cube feeding the gconv stack and its input channel count
  std::array<int, 3> branch_dims() const {
    if (mode == AblationMode::gconv_occupancy_only)
      return {grid.D * grid.k, grid.H * grid.k, grid.W * grid.k};
    return {grid.D, grid.H, grid.W};
  }
  int branch_channels() const {
    return mode == AblationMode::gconv_occupancy_only ? 1 : latent;
  }

  void validate() const {
    require(num_classes >= 2, ErrorCategory::config, "num_classes must be >= 2");
    require(!point_widths.empty() && point_widths.back() == 64, ErrorCategory::config,
            "point branch widths must end at 64");
    require(gconv_layers >= 1 && gconv_kernel >= 1 && gconv_channels >= 1 && global_width >= 1,
            ErrorCategory::config, "bad voxel branch sizes");
    if (uses_gconv()) {
      const auto dims = branch_dims();
      for (int axis = 0; axis < 3; ++axis) {
        const int final_extent = dims[static_cast<std::size_t>(axis)] - gconv_layers * (gconv_kernel - 1);
        require(final_extent >= 1, ErrorCategory::config,
                "gconv stack shrinks the grid below 1 cell");
      }
    }
  }
};

// Per-epoch training metrics as written to the metrics log.
struct EpochMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  double miou = 0.0;
};

template <class S>
struct LiftLayer {
  Parameter<S> w;  // (K,K,K,Cin,Cout)
  Parameter<S> b;  // (Cout)

  FilterBank<S> bank() const { return FilterBank<S>{w.value, b.value}; }
};

template <class S>
struct VvNetModel {
  NetConfig cfg;
  VaeModel<S> vae;  // frozen; untouched by segmentation training
  group::StabilizerSet stab;
  Mlp<S> point_mlp;                // 3 -> ... -> 64, relu throughout
  std::vector<LiftLayer<S>> lifts;
  Mlp<S> global_dense;             // flattened voxel features -> global_width
  Mlp<S> head;                     // (64 + global_width) -> ... -> m, no final relu

  std::vector<Parameter<S>*> trainable_parameters() {
    std::vector<Parameter<S>*> out = point_mlp.params();
    for (auto& l : lifts) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    if (cfg.uses_voxel_branch())
      for (auto* p : global_dense.params()) out.push_back(p);
    for (auto* p : head.params()) out.push_back(p);
    return out;
  }
};

inline std::int64_t flattened_branch_size(const NetConfig& cfg) {
  const auto dims = cfg.branch_dims();
  if (!cfg.uses_gconv())
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2] * cfg.branch_channels();
  const int P = (cfg.group_dedupe
                     ? group::enumerate_stabilizer(cfg.group_kind, true).size()
                     : group::enumerate_stabilizer(cfg.group_kind, false).size());
  std::int64_t cube = 1;
  for (int axis = 0; axis < 3; ++axis)
    cube *= dims[static_cast<std::size_t>(axis)] - cfg.gconv_layers * (cfg.gconv_kernel - 1);
  return cube * P * cfg.gconv_channels;
}

// The point branch is initialized first so its parameters are identical
// across ablation modes for a given seed.
template <class S>
inline VvNetModel<S> make_vvnet(const NetConfig& cfg, VaeModel<S> vae, std::uint64_t seed) {
  cfg.validate();
  if (cfg.uses_vae()) {
    require(vae.k == cfg.grid.k && vae.latent == cfg.latent, ErrorCategory::config,
            "VAE does not match the grid/latent configuration");
  } else if (vae.encoder_body.weights.empty()) {
    Rng vae_rng(0);
    vae = make_vae<S>(cfg.grid.k, cfg.latent, cfg.vae_hidden, vae_rng);
  }
  VvNetModel<S> model;
  model.cfg = cfg;
  model.vae = std::move(vae);
  model.stab = group::enumerate_stabilizer(cfg.group_kind, cfg.group_dedupe);

  Rng rng(seed);
  std::vector<int> pw = {3};
  pw.insert(pw.end(), cfg.point_widths.begin(), cfg.point_widths.end());
  model.point_mlp = make_mlp<S>("net/point", pw, true, rng);

  if (cfg.uses_gconv()) {
    const int K = cfg.gconv_kernel;
    const int P = model.stab.size();
    int cin = cfg.branch_channels();
    for (int i = 0; i < cfg.gconv_layers; ++i) {
      Tensor<S> w({K, K, K, cin, cfg.gconv_channels});
      glorot_fill(w, K * K * K * cin, K * K * K * cfg.gconv_channels, rng);
      LiftLayer<S> layer;
      layer.w = Parameter<S>("net/lift." + std::to_string(i) + ".w", std::move(w));
      layer.b = Parameter<S>("net/lift." + std::to_string(i) + ".b",
                             Tensor<S>::zeros({cfg.gconv_channels}));
      model.lifts.push_back(std::move(layer));
      cin = P * cfg.gconv_channels;
    }
  }
  if (cfg.uses_voxel_branch()) {
    const std::int64_t flat = flattened_branch_size(cfg);
    require(flat <= (1 << 24), ErrorCategory::config, "voxel branch flatten size is too large");
    model.global_dense =
        make_mlp<S>("net/dense", {static_cast<int>(flat), cfg.global_width}, true, rng);
  }
  std::vector<int> hw = {64 + cfg.global_width};
  hw.insert(hw.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
  hw.push_back(cfg.num_classes);
  model.head = make_mlp<S>("net/head", hw, false, rng);
  return model;
}

// Points mapped into [-1, 1]^3 by the cloud's own padded box.
template <class S>
inline Tensor<S> normalized_points(const LabeledPointCloud& cloud) {
  const Aabb box = padded_bounding_box(cloud);
  Tensor<S> pts({cloud.n(), 3});
  for (int i = 0; i < cloud.n(); ++i)
    for (int a = 0; a < 3; ++a) {
      const double t = (cloud.points[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] -
                        box.min[static_cast<std::size_t>(a)]) / box.extent(a);
      pts.values[static_cast<std::size_t>(i * 3 + a)] = static_cast<S>(2.0 * t - 1.0);
    }
  return pts;
}

// Voxel-branch input for the model's ablation mode: the encoded latent grid
// (1,D,H,W,l), the subvoxel occupancy bits (1,Dk,Hk,Wk,1), or empty.
template <class S>
inline Tensor<S> make_branch_input(const LabeledPointCloud& cloud, const VvNetModel<S>& model) {
  const NetConfig& cfg = model.cfg;
  if (!cfg.uses_voxel_branch()) return Tensor<S>();
  if (cfg.mode == AblationMode::gconv_occupancy_only) {
    GridSpec spec = cfg.grid.resolve(padded_bounding_box(cloud));
    const OccupancyGrid occ = occupancy(cloud, spec);
    Tensor<S> t({1, occ.D, occ.H, occ.W, 1});
    for (std::size_t i = 0; i < occ.bits.size(); ++i) t.values[i] = static_cast<S>(occ.bits[i]);
    return t;
  }
  GridSpec spec = cfg.grid.resolve(padded_bounding_box(cloud));
  const SubvoxelTensor sub = voxelize(cloud, spec);
  LatentGrid<S> latent = encode_grid(sub, model.vae);
  Tensor<S> t = std::move(latent.values);
  t.shape = {1, cfg.grid.D, cfg.grid.H, cfg.grid.W, cfg.latent};
  return t;
}

template <class S>
struct ForwardCache {
  Tensor<S> pts;  // (n, 3)
  std::vector<Tensor<S>> point_cache;
  Tensor<S> branch_in;  // (1, D, H, W, C); empty in point_only mode
  std::vector<Tensor<S>> lift_inputs;
  std::vector<Tensor<S>> lift_acts;  // post-relu lift outputs
  std::vector<Tensor<S>> dense_cache;
  Tensor<S> global_feat;  // (1, G)
  Tensor<S> head_in;      // (n, 64 + G)
  std::vector<Tensor<S>> head_cache;
};

// (a) shared per-point features, (b) voxel branch to one global feature,
// (c) broadcast + concatenate, head to per-point scores (n, m).
template <class S>
inline Tensor<S> forward_from_inputs(const VvNetModel<S>& model, const Tensor<S>& pts,
                                     const Tensor<S>& branch_in, ForwardCache<S>* cache) {
  const NetConfig& cfg = model.cfg;
  require(pts.rank() == 2 && pts.dim(1) == 3, ErrorCategory::shape, "points must be (n, 3)");
  const int n = pts.dim(0);
  const int G = cfg.global_width;

  ForwardCache<S> local;
  ForwardCache<S>& ws = cache ? *cache : local;
  ws.pts = pts;
  ws.branch_in = branch_in;

  const Tensor<S> point_feats = model.point_mlp.forward(pts, &ws.point_cache);

  ws.global_feat = Tensor<S>::zeros({1, G});
  if (cfg.uses_voxel_branch()) {
    Tensor<S> flat;
    if (cfg.uses_gconv()) {
      Tensor<S> cur = branch_in;
      ws.lift_inputs.clear();
      ws.lift_acts.clear();
      for (const auto& layer : model.lifts) {
        ws.lift_inputs.push_back(cur);
        LiftedFeatureMap<S> lifted = lift_gconv3d(cur, layer.bank(), model.stab);
        cur = relu(lifted.values);
        ws.lift_acts.push_back(cur);
      }
      flat = cur;
    } else {
      flat = branch_in;
    }
    flat.shape = {1, static_cast<int>(flat.numel())};
    ws.global_feat = model.global_dense.forward(flat, &ws.dense_cache);
  }

  ws.head_in = Tensor<S>({n, 64 + G});
  for (int i = 0; i < n; ++i) {
    S* row = ws.head_in.values.data() + static_cast<std::int64_t>(i) * (64 + G);
    const S* pf = point_feats.values.data() + static_cast<std::int64_t>(i) * 64;
    std::copy_n(pf, 64, row);
    std::copy_n(ws.global_feat.values.data(), G, row + 64);
  }
  return model.head.forward(ws.head_in, &ws.head_cache);
}

// Accumulates gradients of all trainable parameters; the VAE is untouched.
template <class S>
inline void backward_from_cache(VvNetModel<S>& model, ForwardCache<S>& ws,
                                const Tensor<S>& grad_scores) {
  const NetConfig& cfg = model.cfg;
  const int n = ws.pts.dim(0);
  const int G = cfg.global_width;

  const Tensor<S> g_head_in = model.head.backward(ws.head_cache, grad_scores, true);

  Tensor<S> g_point({n, 64});
  Tensor<S> g_global = Tensor<S>::zeros({1, G});
  for (int i = 0; i < n; ++i) {
    const S* row = g_head_in.values.data() + static_cast<std::int64_t>(i) * (64 + G);
    std::copy_n(row, 64, g_point.values.data() + static_cast<std::int64_t>(i) * 64);
    for (int j = 0; j < G; ++j) g_global.values[static_cast<std::size_t>(j)] += row[64 + j];
  }
  model.point_mlp.backward(ws.point_cache, g_point, false);

  if (!cfg.uses_voxel_branch()) return;
  Tensor<S> g_flat = model.global_dense.backward(ws.dense_cache, g_global, true);
  if (!cfg.uses_gconv()) return;  // latent grid is a frozen input

  Tensor<S> g_act = std::move(g_flat);
  for (int i = static_cast<int>(model.lifts.size()) - 1; i >= 0; --i) {
    const Tensor<S>& act = ws.lift_acts[static_cast<std::size_t>(i)];
    g_act.shape = act.shape;
    Tensor<S> g_lift = Tensor<S>::zeros(act.shape);
    relu_backward(act, g_act, &g_lift);

    auto& layer = model.lifts[static_cast<std::size_t>(i)];
    layer.w.value.ensure_grad();
    layer.b.value.ensure_grad();
    Tensor<S> gw = Tensor<S>::zeros(layer.w.value.shape);
    Tensor<S> gb = Tensor<S>::zeros(layer.b.value.shape);
    const Tensor<S>& input = ws.lift_inputs[static_cast<std::size_t>(i)];
    Tensor<S> g_input;
    const bool want_input = i > 0;
    if (want_input) g_input = Tensor<S>::zeros(input.shape);
    backward_lift_gconv3d(input, layer.bank(), model.stab, g_lift,
                          want_input ? &g_input : nullptr, &gw, &gb);
    for (std::size_t j = 0; j < gw.values.size(); ++j) layer.w.value.grad[j] += gw.values[j];
    for (std::size_t j = 0; j < gb.values.size(); ++j) layer.b.value.grad[j] += gb.values[j];
    g_act = std::move(g_input);
  }
}

template <class S>
inline Tensor<S> vvnet_forward(const VvNetModel<S>& model, const LabeledPointCloud& cloud,
                               ForwardCache<S>* cache = nullptr) {
  return forward_from_inputs(model, normalized_points<S>(cloud), make_branch_input(cloud, model),
                             cache);
}

// Per-point argmax; ties broken by lowest class id.
template <class S>
inline std::vector<int> predict_from_scores(const Tensor<S>& scores) {
  const int n = scores.dim(0), m = scores.dim(1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const S* row = scores.values.data() + static_cast<std::int64_t>(i) * m;
    int best = 0;
    for (int j = 1; j < m; ++j)
      if (row[j] > row[best]) best = j;
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

template <class S>
inline std::vector<int> predict_labels(const VvNetModel<S>& model, const LabeledPointCloud& cloud) {
  return predict_from_scores(vvnet_forward(model, cloud));
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 30;
  double lr = 1e-3;
  int batch = 8;  // clouds per adam step
  std::uint64_t seed = 1;
  AblationMode mode = AblationMode::full;

  void validate() const {
    require(epochs >= 1 && batch >= 1 && lr >= 0.0, ErrorCategory::config,
            "bad training config");
  }
};

struct SegItem {
  LabeledPointCloud cloud;
  int category = 0;
};

template <class S>
struct TrainResult {
  VvNetModel<S> model;
  std::vector<EpochMetrics> history;
};

// Minimizes per-point cross entropy with adam. The VAE is pre-trained and
// frozen; voxel-branch inputs are therefore precomputed once per cloud.
// Deterministic given the seed.
template <class S>
inline TrainResult<S> train_segmentation(const std::vector<SegItem>& items,
                                         const std::vector<std::vector<int>>& parts_by_category,
                                         NetConfig net_cfg, const TrainConfig& tc,
                                         VaeModel<S> vae) {
  tc.validate();
  require(!items.empty(), ErrorCategory::domain, "train_segmentation: empty dataset");
  net_cfg.mode = tc.mode;

  TrainResult<S> res;
  res.model = make_vvnet<S>(net_cfg, std::move(vae), tc.seed);
  VvNetModel<S>& model = res.model;

  struct Prep {
    Tensor<S> pts;
    Tensor<S> branch_in;
    std::vector<int> labels;
    int category = 0;
  };
  std::vector<Prep> prep;
  prep.reserve(items.size());
  for (const auto& item : items) {
    require(item.cloud.has_labels(), ErrorCategory::domain,
            "train_segmentation: clouds must be labeled");
    Prep p;
    p.pts = normalized_points<S>(item.cloud);
    p.branch_in = make_branch_input(item.cloud, model);
    p.labels = *item.cloud.labels;
    p.category = item.category;
    for (int lab : p.labels)
      require(lab >= 0 && lab < net_cfg.num_classes, ErrorCategory::domain,
              "train_segmentation: label out of range");
    prep.push_back(std::move(p));
  }

  Rng rng(tc.seed ^ 0x5ee9a5e5u);
  AdamConfig adam;
  adam.lr = tc.lr;
  auto params = model.trainable_parameters();

  std::vector<int> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    rng.shuffle(order);
    EpochMetrics em;
    std::int64_t points_total = 0, points_hit = 0;
    double miou_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch));
      const int bs = static_cast<int>(end - start);
      zero_grads(params);
      for (std::size_t oi = start; oi < end; ++oi) {
        Prep& p = prep[static_cast<std::size_t>(order[oi])];
        ForwardCache<S> ws;
        const Tensor<S> scores = forward_from_inputs(model, p.pts, p.branch_in, &ws);
        CeResult<S> ce = softmax_cross_entropy(scores, p.labels);
        require(std::isfinite(ce.loss), ErrorCategory::domain,
                "train_segmentation: non-finite loss");
        em.loss += ce.loss;

        const std::vector<int> pred = predict_from_scores(scores);
        points_total += static_cast<std::int64_t>(p.labels.size());
        for (std::size_t i = 0; i < pred.size(); ++i)
          if (pred[i] == p.labels[i]) ++points_hit;
        miou_sum += instance_miou(p.labels, pred,
                                  parts_by_category[static_cast<std::size_t>(p.category)]);

        for (auto& g : ce.grad.values) g = static_cast<S>(g / static_cast<S>(bs));
        backward_from_cache(model, ws, ce.grad);
      }
      if (tc.lr > 0.0)
        for (auto* par : params) adam_step(*par, adam);
    }
    em.loss /= static_cast<double>(items.size());
    em.accuracy = static_cast<double>(points_hit) / static_cast<double>(points_total);
    em.miou = miou_sum / static_cast<double>(items.size());
    res.history.push_back(em);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint layout for full models.

template <class S>
inline Checkpoint vvnet_to_checkpoint(VvNetModel<S>& model) {
  const NetConfig& c = model.cfg;
  Checkpoint ck;
  ck.add_scalars("net/meta",
                 {static_cast<float>(c.grid.D), static_cast<float>(c.grid.H),
                  static_cast<float>(c.grid.W), static_cast<float>(c.grid.k),
                  static_cast<float>(c.grid.sigma_scale),
                  static_cast<float>(c.grid.kernel == RbfKernel::gaussian ? 0 : 1),
                  static_cast<float>(c.grid.combine == Combine::max ? 0 : 1),
                  static_cast<float>(c.grid.neighborhood == Neighborhood::local ? 0 : 1),
                  static_cast<float>(c.latent), static_cast<float>(c.vae_hidden),
                  static_cast<float>(c.gconv_layers), static_cast<float>(c.gconv_kernel),
                  static_cast<float>(c.gconv_channels),
                  static_cast<float>(c.group_kind == group::Kind::p4 ? 0 : 1),
                  static_cast<float>(c.group_dedupe ? 1 : 0),
                  static_cast<float>(c.global_width), static_cast<float>(c.num_classes),
                  static_cast<float>(static_cast<int>(c.mode))});
  std::vector<float> pw, hh;
  for (int w : c.point_widths) pw.push_back(static_cast<float>(w));
  for (int w : c.head_hidden) hh.push_back(static_cast<float>(w));
  ck.add_scalars("net/point_widths", pw);
  ck.add_scalars("net/head_hidden", hh);

  for (auto* p : model.trainable_parameters()) ck.add_tensor(p->name, p->value);
  if (c.uses_vae()) vae_to_checkpoint(model.vae, ck);
  return ck;
}

template <class S>
inline VvNetModel<S> vvnet_from_checkpoint(const Checkpoint& ck) {
  const NamedTensor& meta = ck.get("net/meta");
  require(meta.values.size() == 18, ErrorCategory::parse, "bad net meta tensor");
  NetConfig c;
  c.grid.D = static_cast<int>(meta.values[0]);
  c.grid.H = static_cast<int>(meta.values[1]);
  c.grid.W = static_cast<int>(meta.values[2]);
  c.grid.k = static_cast<int>(meta.values[3]);
  c.grid.sigma_scale = meta.values[4];
  c.grid.kernel = meta.values[5] == 0 ? RbfKernel::gaussian : RbfKernel::inverse_quadratic;
  c.grid.combine = meta.values[6] == 0 ? Combine::max : Combine::sum;
  c.grid.neighborhood = meta.values[7] == 0 ? Neighborhood::local : Neighborhood::global;
  c.latent = static_cast<int>(meta.values[8]);
  c.vae_hidden = static_cast<int>(meta.values[9]);
  c.gconv_layers = static_cast<int>(meta.values[10]);
  c.gconv_kernel = static_cast<int>(meta.values[11]);
  c.gconv_channels = static_cast<int>(meta.values[12]);
  c.group_kind = meta.values[13] == 0 ? group::Kind::p4 : group::Kind::p4m;
  c.group_dedupe = meta.values[14] != 0;
  c.global_width = static_cast<int>(meta.values[15]);
  c.num_classes = static_cast<int>(meta.values[16]);
  c.mode = static_cast<AblationMode>(static_cast<int>(meta.values[17]));
  c.point_widths.clear();
  for (float v : ck.get("net/point_widths").values) c.point_widths.push_back(static_cast<int>(v));
  c.head_hidden.clear();
  for (float v : ck.get("net/head_hidden").values) c.head_hidden.push_back(static_cast<int>(v));

  VaeModel<S> vae;
  if (ck.find("vae/meta")) vae = vae_from_checkpoint<S>(ck);
  VvNetModel<S> model = make_vvnet<S>(c, std::move(vae), 0);
  for (auto* p : model.trainable_parameters()) load_param(ck, *p);
  return model;
}

}  // namespace vvnet
