#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/metrics.hpp"
#include "vvnet/pointcloud.hpp"
#include "vvnet/segnet.hpp"
#include "vvnet/synth.hpp"
#include "vvnet/vae.hpp"
#include "vvnet/voxelizer.hpp"

namespace vvnet {

// ---------------------------------------------------------------------------
// VAE training data from clouds: per-voxel k^3 blocks, either the RBF field
// or its {0,1} subvoxel occupancy (the ablation that the VAE should fail
// to compress well).

template <class S>
inline Tensor<S> collect_vae_blocks(const std::vector<SegItem>& items, const GridConfig& grid,
                                    int max_blocks, double zero_fraction, std::uint64_t seed,
                                    bool binary_blocks = false) {
  require(max_blocks >= 1, ErrorCategory::config, "max_blocks must be positive");
  const int bsz = grid.k * grid.k * grid.k;
  std::vector<std::vector<S>> rows;
  Rng rng(seed);
  for (const auto& item : items) {
    const GridSpec spec = grid.resolve(padded_bounding_box(item.cloud));
    const SubvoxelTensor sub = voxelize(item.cloud, spec);
    OccupancyGrid occ;
    if (binary_blocks) occ = occupancy(item.cloud, spec);
    for (std::int64_t v = 0; v < spec.voxel_count(); ++v) {
      const double* blk = sub.values.data() + v * bsz;
      bool all_zero = true;
      for (int i = 0; i < bsz; ++i)
        if (blk[i] != 0.0) {
          all_zero = false;
          break;
        }
      if (all_zero && rng.uniform() >= zero_fraction) continue;
      std::vector<S> row(static_cast<std::size_t>(bsz));
      if (binary_blocks) {
        const int d = static_cast<int>(v / (static_cast<std::int64_t>(spec.H) * spec.W));
        const int h = static_cast<int>((v / spec.W) % spec.H);
        const int w = static_cast<int>(v % spec.W);
        int j = 0;
        for (int a = 0; a < grid.k; ++a)
          for (int b = 0; b < grid.k; ++b)
            for (int c = 0; c < grid.k; ++c, ++j) {
              const std::size_t bit =
                  (static_cast<std::size_t>(d * grid.k + a) * occ.H + (h * grid.k + b)) * occ.W +
                  (w * grid.k + c);
              row[static_cast<std::size_t>(j)] = static_cast<S>(occ.bits[bit]);
            }
      } else {
        for (int i = 0; i < bsz; ++i) row[static_cast<std::size_t>(i)] = static_cast<S>(blk[i]);
      }
      rows.push_back(std::move(row));
      if (static_cast<int>(rows.size()) >= max_blocks) break;
    }
    if (static_cast<int>(rows.size()) >= max_blocks) break;
  }
  require(!rows.empty(), ErrorCategory::domain, "no VAE training blocks collected");
  Tensor<S> out({static_cast<int>(rows.size()), bsz});
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(rows[r].begin(), rows[r].end(),
              out.values.begin() + static_cast<std::int64_t>(r) * bsz);
  return out;
}

struct VaeFitConfig {
  int epochs = 10;
  double lr = 1e-3;
  int batch = 64;
  std::uint64_t seed = 1;
  int max_blocks = 10000;
  double zero_fraction = 0.1;
  int hidden = 128;
};

template <class S>
inline VaeModel<S> fit_vae(const std::vector<SegItem>& train_items, const GridConfig& grid,
                           int latent, const VaeFitConfig& fit, bool binary_blocks = false) {
  const Tensor<S> blocks = collect_vae_blocks<S>(train_items, grid, fit.max_blocks,
                                                 fit.zero_fraction, fit.seed, binary_blocks);
  Rng rng(fit.seed);
  VaeModel<S> model = make_vae<S>(grid.k, latent, fit.hidden, rng);
  VaeTrainConfig tc;
  tc.epochs = fit.epochs;
  tc.lr = fit.lr;
  tc.batch = fit.batch;
  tc.seed = fit.seed;
  train_vae(model, blocks, tc);
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation over a list of clouds (each cloud is one instance).

template <class S>
inline EvalReport evaluate_model(const VvNetModel<S>& model, const std::vector<SegItem>& items,
                                 const std::vector<std::vector<int>>& parts_by_category,
                                 const std::vector<std::string>& category_names) {
  require(!items.empty(), ErrorCategory::domain, "evaluate_model: no items");
  EvalReport rep;
  std::map<int, std::pair<std::int64_t, std::int64_t>> pooled;  // part -> (inter, union)
  std::map<std::string, std::pair<double, int>> cat_acc;
  std::int64_t hits = 0, total = 0;
  double miou_sum = 0.0;

  for (const auto& item : items) {
    require(item.cloud.has_labels(), ErrorCategory::domain, "evaluate_model: unlabeled cloud");
    const std::vector<int>& gt = *item.cloud.labels;
    const std::vector<int> pred = predict_labels(model, item.cloud);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == pred[i]) ++hits;
      ++total;
    }
    const auto& parts = parts_by_category[static_cast<std::size_t>(item.category)];
    const double mi = instance_miou(gt, pred, parts);
    miou_sum += mi;
    auto& ca = cat_acc[category_names[static_cast<std::size_t>(item.category)]];
    ca.first += mi;
    ca.second += 1;
    for (const auto& per_cat : parts_by_category)
      for (int part : per_cat) {
        auto& [inter, uni] = pooled[part];
        for (std::size_t i = 0; i < gt.size(); ++i) {
          const bool a = gt[i] == part, b = pred[i] == part;
          if (a && b) ++inter;
          if (a || b) ++uni;
        }
      }
  }
  rep.overall_accuracy = static_cast<double>(hits) / static_cast<double>(total);
  rep.instance_miou = miou_sum / static_cast<double>(items.size());
  for (const auto& [cat, acc] : cat_acc) rep.category_miou[cat] = acc.first / acc.second;
  for (const auto& [part, iu] : pooled)
    rep.per_part_iou[part] = iu.second == 0 ? 1.0 : static_cast<double>(iu.first) / iu.second;
  return rep;
}

template <class S>
inline double accuracy_on(const VvNetModel<S>& model, const std::vector<SegItem>& items) {
  std::int64_t hits = 0, total = 0;
  for (const auto& item : items) {
    const std::vector<int> pred = predict_labels(model, item.cloud);
    const std::vector<int>& gt = *item.cloud.labels;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == pred[i]) ++hits;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Accuracy at the given missing-data ratios; each cloud is reduced by
// farthest point sampling before prediction.
struct SweepRow {
  double missing_ratio = 0.0;
  double accuracy = 0.0;
};

template <class S>
inline std::vector<SweepRow> robustness_sweep(const VvNetModel<S>& model,
                                              const std::vector<SegItem>& items,
                                              const std::vector<double>& missing_ratios,
                                              std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (double ratio : missing_ratios) {
    require(ratio >= 0.0 && ratio < 1.0, ErrorCategory::config,
            "missing ratio must be in [0, 1)");
    std::int64_t hits = 0, total = 0;
    for (const auto& item : items) {
      const int n = item.cloud.n();
      const int keep = std::max(1, static_cast<int>(std::lround((1.0 - ratio) * n)));
      const std::vector<int> idx = farthest_point_sample(item.cloud, keep, seed);
      const LabeledPointCloud reduced = subsample(item.cloud, idx);
      const std::vector<int> pred = predict_labels(model, reduced);
      const std::vector<int>& gt = *reduced.labels;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] == pred[i]) ++hits;
        ++total;
      }
    }
    rows.push_back({ratio, static_cast<double>(hits) / static_cast<double>(total)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// One desk-scale experiment: fit the VAE the mode needs, train segmentation,
// evaluate on the test split.

template <class S>
struct DeskRunResult {
  VvNetModel<S> model;
  std::vector<EpochMetrics> history;
  EvalReport report;
};

template <class S>
inline DeskRunResult<S> run_desk_pipeline(const SynthDataset& ds, NetConfig net_cfg,
                                          const TrainConfig& tc, const VaeFitConfig& vae_fit) {
  net_cfg.num_classes = ds.num_classes;
  net_cfg.mode = tc.mode;
  VaeModel<S> vae;
  if (net_cfg.uses_vae()) vae = fit_vae<S>(ds.train, net_cfg.grid, net_cfg.latent, vae_fit);
  DeskRunResult<S> out;
  TrainResult<S> tr = train_segmentation<S>(ds.train, ds.parts_by_category, net_cfg, tc, std::move(vae));
  out.model = std::move(tr.model);
  out.history = std::move(tr.history);
  out.report = evaluate_model(out.model, ds.test, ds.parts_by_category, ds.category_names);
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text metrics log: one line per epoch, stable formatting so identical
// runs produce identical bytes.

inline std::string render_metrics_log(const std::vector<EpochMetrics>& history) {
  std::string out;
  char line[128];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(line, sizeof line, "epoch=%zu loss=%.9g acc=%.9g miou=%.9g\n", i + 1,
                  history[i].loss, history[i].accuracy, history[i].miou);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-disk dataset layout: clouds/<name>.txt with global labels, index.txt
// ("<relpath> <category> <train|test>"), parts.txt ("<category> <ids...>").

inline void save_dataset(const SynthDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "clouds");
  std::string index;
  int counter = 0;
  auto dump = [&](const std::vector<SegItem>& items, const char* split) {
    for (const auto& item : items) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04d.txt",
                    ds.category_names[static_cast<std::size_t>(item.category)].c_str(), counter++);
      const std::string rel = std::string("clouds/") + name;
      save_cloud(item.cloud, (fs::path(dir) / rel).string());
      index += rel + " " + ds.category_names[static_cast<std::size_t>(item.category)] + " " + split + "\n";
    }
  };
  dump(ds.train, "train");
  dump(ds.test, "test");
  atomic_write_file((fs::path(dir) / "index.txt").string(), index);

  std::string parts;
  for (std::size_t c = 0; c < ds.category_names.size(); ++c) {
    parts += ds.category_names[c];
    for (int id : ds.parts_by_category[c]) parts += " " + std::to_string(id);
    parts += "\n";
  }
  atomic_write_file((fs::path(dir) / "parts.txt").string(), parts);
}

namespace detail {
inline bool is_blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}
}  // namespace detail

inline SynthDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  SynthDataset ds;

  std::ifstream parts_in(fs::path(dir) / "parts.txt");
  require(parts_in.good(), ErrorCategory::io, "cannot open " + dir + "/parts.txt");
  std::string line;
  int max_part = -1;
  while (std::getline(parts_in, line)) {
    if (detail::is_blank(line)) continue;
    std::istringstream ls(line);
    std::string cat;
    ls >> cat;
    std::vector<int> ids;
    int id;
    while (ls >> id) {
      ids.push_back(id);
      max_part = std::max(max_part, id);
    }
    require(!ids.empty(), ErrorCategory::parse, dir + "/parts.txt: category with no parts");
    ds.category_names.push_back(cat);
    ds.parts_by_category.push_back(std::move(ids));
  }
  require(!ds.category_names.empty(), ErrorCategory::parse, dir + "/parts.txt: empty");
  ds.num_classes = max_part + 1;

  std::ifstream index_in(fs::path(dir) / "index.txt");
  require(index_in.good(), ErrorCategory::io, "cannot open " + dir + "/index.txt");
  while (std::getline(index_in, line)) {
    if (detail::is_blank(line)) continue;
    std::istringstream ls(line);
    std::string rel, cat, split;
    require(static_cast<bool>(ls >> rel >> cat >> split), ErrorCategory::parse,
            dir + "/index.txt: malformed line '" + line + "'");
    int cat_id = -1;
    for (std::size_t c = 0; c < ds.category_names.size(); ++c)
      if (ds.category_names[c] == cat) cat_id = static_cast<int>(c);
    require(cat_id >= 0, ErrorCategory::parse, dir + "/index.txt: unknown category " + cat);
    SegItem item{load_cloud((fs::path(dir) / rel).string(), true), cat_id};
    if (split == "train")
      ds.train.push_back(std::move(item));
    else if (split == "test")
      ds.test.push_back(std::move(item));
    else
      fail(ErrorCategory::parse, dir + "/index.txt: unknown split " + split);
  }
  require(!ds.train.empty() || !ds.test.empty(), ErrorCategory::parse, dir + ": empty dataset");
  return ds;
}

}  // namespace vvnet
