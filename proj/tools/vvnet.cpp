// Command-line surface for the point-cloud segmentation pipeline: synthetic
// dataset generation, voxelization, VAE and segmentation training, metrics,
// and the robustness / kernel comparison harnesses.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vvnet/vvnet.hpp"

namespace fs = std::filesystem;
using namespace vvnet;

using Real = float;  // training precision; doubles are for gradient-check builds only

namespace {

struct CommonArgs {
  std::string config_path;
  std::string manifest_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--from-manifest", args.manifest_path,
                  "take the config from a previous run's manifest");
  cmd->add_option("set", args.overrides, "key=value overrides applied after the config file");
}

ConfigMap resolve_config(const CommonArgs& args) {
  ConfigMap cfg;
  if (!args.manifest_path.empty()) cfg = config_from_manifest(args.manifest_path);
  if (!args.config_path.empty())
    for (const auto& [k, v] : parse_config_file(args.config_path)) cfg[k] = v;
  for (const auto& line : args.overrides) apply_config_line(cfg, line, "override");
  return cfg;
}

RbfKernel kernel_from_cfg(const ConfigMap& cfg) {
  const std::string s = cfg_str(cfg, "kernel", "gaussian");
  if (s == "gaussian") return RbfKernel::gaussian;
  if (s == "inverse_quadratic") return RbfKernel::inverse_quadratic;
  fail(ErrorCategory::config, "kernel must be gaussian or inverse_quadratic, got " + s);
}

GridConfig grid_from_cfg(const ConfigMap& cfg) {
  GridConfig g;
  g.D = static_cast<int>(cfg_int(cfg, "D", 16));
  g.H = static_cast<int>(cfg_int(cfg, "H", 16));
  g.W = static_cast<int>(cfg_int(cfg, "W", 16));
  g.k = static_cast<int>(cfg_int(cfg, "k", 4));
  g.sigma_scale = cfg_double(cfg, "sigma_scale", 1.0);
  g.kernel = kernel_from_cfg(cfg);
  const std::string comb = cfg_str(cfg, "combine", "max");
  require(comb == "max" || comb == "sum", ErrorCategory::config, "combine must be max or sum");
  g.combine = comb == "max" ? Combine::max : Combine::sum;
  const std::string nb = cfg_str(cfg, "neighborhood", "local");
  require(nb == "local" || nb == "global", ErrorCategory::config,
          "neighborhood must be local or global");
  g.neighborhood = nb == "local" ? Neighborhood::local : Neighborhood::global;
  return g;
}

NetConfig net_from_cfg(const ConfigMap& cfg) {
  NetConfig n;
  n.grid = grid_from_cfg(cfg);
  n.latent = static_cast<int>(cfg_int(cfg, "latent", 8));
  n.vae_hidden = static_cast<int>(cfg_int(cfg, "vae_hidden", 128));
  n.point_widths = cfg_int_list(cfg, "point_widths", {64, 64});
  n.gconv_layers = static_cast<int>(cfg_int(cfg, "gconv_layers", 2));
  n.gconv_kernel = static_cast<int>(cfg_int(cfg, "gconv_kernel", 3));
  n.gconv_channels = static_cast<int>(cfg_int(cfg, "gconv_channels", 8));
  const std::string grp = cfg_str(cfg, "group", "p4m");
  require(grp == "p4" || grp == "p4m", ErrorCategory::config, "group must be p4 or p4m");
  n.group_kind = grp == "p4" ? group::Kind::p4 : group::Kind::p4m;
  n.group_dedupe = cfg_bool(cfg, "group_dedupe", true);
  n.global_width = static_cast<int>(cfg_int(cfg, "global_width", 256));
  n.head_hidden = cfg_int_list(cfg, "head_hidden", {64});
  n.mode = mode_from_name(cfg_str(cfg, "mode", "full"));
  return n;
}

TrainConfig train_from_cfg(const ConfigMap& cfg) {
  TrainConfig t;
  t.epochs = static_cast<int>(cfg_int(cfg, "epochs", 30));
  t.lr = cfg_double(cfg, "lr", 1e-3);
  t.batch = static_cast<int>(cfg_int(cfg, "batch", 8));
  t.seed = static_cast<std::uint64_t>(cfg_int(cfg, "seed", 1));
  t.mode = mode_from_name(cfg_str(cfg, "mode", "full"));
  return t;
}

VaeFitConfig vae_fit_from_cfg(const ConfigMap& cfg) {
  VaeFitConfig f;
  f.epochs = static_cast<int>(cfg_int(cfg, "vae_epochs", 10));
  f.lr = cfg_double(cfg, "vae_lr", 1e-3);
  f.batch = static_cast<int>(cfg_int(cfg, "vae_batch", 64));
  f.seed = static_cast<std::uint64_t>(cfg_int(cfg, "seed", 1));
  f.max_blocks = static_cast<int>(cfg_int(cfg, "vae_max_blocks", 10000));
  f.zero_fraction = cfg_double(cfg, "vae_zero_fraction", 0.1);
  f.hidden = static_cast<int>(cfg_int(cfg, "vae_hidden", 128));
  return f;
}

std::vector<SegItem>& split_of(SynthDataset& ds, const std::string& split) {
  if (split == "train") return ds.train;
  if (split == "test") return ds.test;
  fail(ErrorCategory::config, "split must be train or test, got " + split);
}

// ---------------------------------------------------------------------------

int run_synth_dataset(const ConfigMap& cfg) {
  const std::string out_dir = cfg_str_required(cfg, "out");
  SynthDataset ds = make_synth_dataset(
      static_cast<int>(cfg_int(cfg, "clouds", 200)), static_cast<int>(cfg_int(cfg, "points", 512)),
      cfg_double(cfg, "noise", 0.24), static_cast<std::uint64_t>(cfg_int(cfg, "seed", 1)),
      cfg_double(cfg, "train_fraction", 0.8), cfg_bool(cfg, "rotate", true),
      cfg_double(cfg, "scale", 6.0));
  save_dataset(ds, out_dir);
  write_manifest((fs::path(out_dir) / "manifest.json").string(), "synth-dataset", cfg);
  std::printf("wrote %zu train / %zu test clouds to %s\n", ds.train.size(), ds.test.size(),
              out_dir.c_str());
  return 0;
}

int run_voxelize(const ConfigMap& cfg) {
  const std::string in = cfg_str_required(cfg, "in");
  const std::string out = cfg_str_required(cfg, "out");
  const LabeledPointCloud cloud = load_cloud(in, cfg_bool(cfg, "labels", false));
  const GridConfig grid = grid_from_cfg(cfg);
  const GridSpec spec = grid.resolve(padded_bounding_box(cloud));
  const SubvoxelTensor sub = voxelize(cloud, spec, static_cast<int>(cfg_int(cfg, "workers", 1)));

  GridData gd;
  gd.dims = {spec.D, spec.H, spec.W, spec.k, spec.k, spec.k};
  gd.values.resize(sub.values.size());
  for (std::size_t i = 0; i < sub.values.size(); ++i)
    gd.values[i] = static_cast<float>(sub.values[i]);
  write_grid_file(out, gd);
  write_manifest(out + ".manifest.json", "voxelize", cfg);
  std::printf("wrote grid %s dims (%d,%d,%d,%d,%d,%d) sigma=%.6g\n", out.c_str(), spec.D, spec.H,
              spec.W, spec.k, spec.k, spec.k, spec.sigma);
  return 0;
}

int run_train_vae(const ConfigMap& cfg) {
  const std::string dataset_dir = cfg_str_required(cfg, "dataset");
  const std::string out = cfg_str_required(cfg, "out");
  SynthDataset ds = load_dataset(dataset_dir);
  const GridConfig grid = grid_from_cfg(cfg);
  const VaeFitConfig fit = vae_fit_from_cfg(cfg);
  const bool binary = cfg_bool(cfg, "binary_blocks", false);
  const int latent = static_cast<int>(cfg_int(cfg, "latent", 8));

  const Tensor<Real> blocks =
      collect_vae_blocks<Real>(ds.train, grid, fit.max_blocks, fit.zero_fraction, fit.seed, binary);
  Rng rng(fit.seed);
  VaeModel<Real> model = make_vae<Real>(grid.k, latent, fit.hidden, rng);
  VaeTrainConfig vtc;
  vtc.epochs = fit.epochs;
  vtc.lr = fit.lr;
  vtc.batch = fit.batch;
  vtc.seed = fit.seed;
  const auto history = train_vae(model, blocks, vtc);

  Checkpoint ck;
  vae_to_checkpoint(model, ck);
  write_checkpoint(out, ck);
  std::string log;
  char line[128];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(line, sizeof line, "epoch=%zu loss=%.9g recon=%.9g kl=%.9g\n", i + 1,
                  history[i].mean_loss, history[i].mean_recon, history[i].mean_kl);
    log += line;
  }
  atomic_write_file(out + ".loss.txt", log);
  write_manifest(out + ".manifest.json", "train-vae", cfg);
  std::printf("trained VAE on %d blocks, final loss %.6g -> %s\n", blocks.dim(0),
              history.back().mean_loss, out.c_str());
  return 0;
}

int run_encode(const ConfigMap& cfg) {
  const std::string in = cfg_str_required(cfg, "in");
  const std::string vae_path = cfg_str_required(cfg, "vae");
  const std::string out = cfg_str_required(cfg, "out");
  const LabeledPointCloud cloud = load_cloud(in, cfg_bool(cfg, "labels", false));
  const VaeModel<Real> model = vae_from_checkpoint<Real>(read_checkpoint(vae_path));
  GridConfig grid = grid_from_cfg(cfg);
  require(grid.k == model.k, ErrorCategory::config,
          "grid k does not match the VAE checkpoint (k=" + std::to_string(model.k) + ")");
  const GridSpec spec = grid.resolve(padded_bounding_box(cloud));
  const SubvoxelTensor sub = voxelize(cloud, spec);
  const LatentGrid<Real> latent = encode_grid(sub, model);

  GridData gd;
  gd.dims = latent.values.shape;
  gd.values.resize(latent.values.values.size());
  for (std::size_t i = 0; i < gd.values.size(); ++i)
    gd.values[i] = static_cast<float>(latent.values.values[i]);
  write_grid_file(out, gd);
  write_manifest(out + ".manifest.json", "encode", cfg);
  std::printf("wrote latent grid %s dims (%d,%d,%d,%d)\n", out.c_str(), gd.dims[0], gd.dims[1],
              gd.dims[2], gd.dims[3]);
  return 0;
}

int run_train_seg(const ConfigMap& cfg) {
  const std::string dataset_dir = cfg_str_required(cfg, "dataset");
  const std::string out = cfg_str_required(cfg, "out");
  SynthDataset ds = load_dataset(dataset_dir);
  NetConfig net = net_from_cfg(cfg);
  net.num_classes = ds.num_classes;
  const TrainConfig tc = train_from_cfg(cfg);

  VaeModel<Real> vae;
  if (net.uses_vae()) {
    const std::string vae_path = cfg_str_required(cfg, "vae");
    vae = vae_from_checkpoint<Real>(read_checkpoint(vae_path));
  }
  TrainResult<Real> res = train_segmentation<Real>(ds.train, ds.parts_by_category, net, tc,
                                                   std::move(vae));
  Checkpoint ck = vvnet_to_checkpoint(res.model);
  write_checkpoint(out, ck);
  atomic_write_file(cfg_str(cfg, "metrics", out + ".metrics.txt"),
                    render_metrics_log(res.history));
  write_manifest(out + ".manifest.json", "train-seg", cfg);
  std::printf("trained %s model for %d epochs, final train acc %.4f -> %s\n",
              mode_name(tc.mode), tc.epochs, res.history.back().accuracy, out.c_str());
  return 0;
}

int run_eval(const ConfigMap& cfg) {
  const std::string model_path = cfg_str_required(cfg, "model");
  const std::string dataset_dir = cfg_str_required(cfg, "dataset");
  const std::string out = cfg_str_required(cfg, "out");
  SynthDataset ds = load_dataset(dataset_dir);
  const VvNetModel<Real> model = vvnet_from_checkpoint<Real>(read_checkpoint(model_path));
  const auto& items = split_of(ds, cfg_str(cfg, "split", "test"));
  const EvalReport rep = evaluate_model(model, items, ds.parts_by_category, ds.category_names);
  atomic_write_file(out, rep.to_table());
  write_manifest(out + ".manifest.json", "eval", cfg);
  std::fputs(rep.to_table().c_str(), stdout);
  return 0;
}

int run_group_selftest() {
  const auto p4 = group::enumerate_stabilizer(group::Kind::p4);
  const auto p4m = group::enumerate_stabilizer(group::Kind::p4m);
  const auto rep4 = group::check_axioms(p4, true);
  const auto rep4m = group::check_axioms(p4m, true);
  std::printf("|p4|=%d\n|p4m|=%d\n", p4.size(), p4m.size());
  std::printf("p4: closure=%s identity=%s inverses=%s associativity=%s\n",
              rep4.closed ? "ok" : "FAIL", rep4.has_identity ? "ok" : "FAIL",
              rep4.has_inverses ? "ok" : "FAIL", rep4.associative ? "ok" : "FAIL");
  std::printf("p4m: closure=%s identity=%s inverses=%s associativity=%s\n",
              rep4m.closed ? "ok" : "FAIL", rep4m.has_identity ? "ok" : "FAIL",
              rep4m.has_inverses ? "ok" : "FAIL", rep4m.associative ? "ok" : "FAIL");
  const bool ok = p4.size() == 24 && p4m.size() == 48 && rep4.ok() && rep4m.ok();
  std::printf("%s\n", ok ? "selftest ok" : "selftest FAILED");
  return ok ? 0 : 1;
}

int run_robustness_sweep(const ConfigMap& cfg) {
  const std::string model_path = cfg_str_required(cfg, "model");
  const std::string dataset_dir = cfg_str_required(cfg, "dataset");
  const std::string out = cfg_str_required(cfg, "out");
  SynthDataset ds = load_dataset(dataset_dir);
  const VvNetModel<Real> model = vvnet_from_checkpoint<Real>(read_checkpoint(model_path));
  const auto& items = split_of(ds, cfg_str(cfg, "split", "test"));

  std::vector<double> ratios;
  std::stringstream ss(cfg_str(cfg, "ratios", "0,0.75,0.875"));
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) ratios.push_back(std::stod(tok));
  const auto rows = robustness_sweep(model, items, ratios,
                                     static_cast<std::uint64_t>(cfg_int(cfg, "seed", 1)));
  std::string table;
  char line[96];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "missing_ratio=%.6g accuracy=%.6f\n", r.missing_ratio,
                  r.accuracy);
    table += line;
  }
  atomic_write_file(out, table);
  write_manifest(out + ".manifest.json", "robustness-sweep", cfg);
  std::fputs(table.c_str(), stdout);
  return 0;
}

int run_kernel_compare(const ConfigMap& cfg) {
  const std::string dataset_dir = cfg_str_required(cfg, "dataset");
  const std::string out = cfg_str_required(cfg, "out");
  SynthDataset ds = load_dataset(dataset_dir);
  NetConfig net = net_from_cfg(cfg);
  TrainConfig tc = train_from_cfg(cfg);
  tc.mode = AblationMode::full;
  const VaeFitConfig fit = vae_fit_from_cfg(cfg);

  std::string table = "kernel overall_acc instance_miou\n";
  char line[128];
  for (RbfKernel kernel : {RbfKernel::gaussian, RbfKernel::inverse_quadratic}) {
    NetConfig k_net = net;
    k_net.grid.kernel = kernel;
    const DeskRunResult<Real> run = run_desk_pipeline<Real>(ds, k_net, tc, fit);
    std::snprintf(line, sizeof line, "%s %.6f %.6f\n", kernel_name(kernel),
                  run.report.overall_accuracy, run.report.instance_miou);
    table += line;
    std::fputs(line, stdout);
  }
  atomic_write_file(out, table);
  write_manifest(out + ".manifest.json", "kernel-compare", cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point cloud segmentation pipeline (RBF subvoxels + per-voxel VAE + "
               "group-equivariant convolution)"};
  app.require_subcommand(1);

  CommonArgs synth_args, vox_args, tvae_args, enc_args, tseg_args, eval_args, sweep_args,
      kcmp_args;

  auto* synth = app.add_subcommand("synth-dataset",
                                   "generate a labeled synthetic dataset (keys: out, clouds, "
                                   "points, noise, seed, train_fraction)");
  add_common(synth, synth_args);
  auto* vox = app.add_subcommand("voxelize",
                                 "voxelize one cloud into a subvoxel RBF grid file (keys: in, "
                                 "out, labels, D, H, W, k, sigma_scale, kernel, combine, "
                                 "neighborhood, workers)");
  add_common(vox, vox_args);
  auto* tvae = app.add_subcommand("train-vae",
                                  "train the per-voxel VAE on dataset blocks (keys: dataset, "
                                  "out, latent, vae_hidden, vae_epochs, vae_lr, vae_batch, "
                                  "vae_max_blocks, vae_zero_fraction, binary_blocks, seed, grid keys)");
  add_common(tvae, tvae_args);
  auto* enc = app.add_subcommand("encode",
                                 "encode one cloud into a latent grid file (keys: in, vae, out, "
                                 "labels, grid keys)");
  add_common(enc, enc_args);
  auto* tseg = app.add_subcommand("train-seg",
                                  "train the segmentation network (keys: dataset, out, vae, "
                                  "mode, epochs, lr, batch, seed, metrics, net keys)");
  add_common(tseg, tseg_args);
  auto* evalc = app.add_subcommand("eval",
                                   "evaluate a model checkpoint on a dataset split (keys: "
                                   "model, dataset, split, out)");
  add_common(evalc, eval_args);
  auto* selftest = app.add_subcommand("group-selftest",
                                      "enumerate p4/p4m stabilizers and verify the group axioms");
  auto* sweep = app.add_subcommand("robustness-sweep",
                                   "evaluate a model at missing-data ratios via farthest point "
                                   "sampling (keys: model, dataset, split, ratios, seed, out)");
  add_common(sweep, sweep_args);
  auto* kcmp = app.add_subcommand("kernel-compare",
                                  "train twin models differing only in RBF kernel and report "
                                  "both metric sets (keys: dataset, out + train-seg keys)");
  add_common(kcmp, kcmp_args);
  auto* help = app.add_subcommand("help", "print the full command reference");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth_dataset(resolve_config(synth_args));
    if (vox->parsed()) return run_voxelize(resolve_config(vox_args));
    if (tvae->parsed()) return run_train_vae(resolve_config(tvae_args));
    if (enc->parsed()) return run_encode(resolve_config(enc_args));
    if (tseg->parsed()) return run_train_seg(resolve_config(tseg_args));
    if (evalc->parsed()) return run_eval(resolve_config(eval_args));
    if (selftest->parsed()) return run_group_selftest();
    if (sweep->parsed()) return run_robustness_sweep(resolve_config(sweep_args));
    if (kcmp->parsed()) return run_kernel_compare(resolve_config(kcmp_args));
    if (help->parsed()) {
      std::cout << app.help("", CLI::AppFormatMode::All);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.category_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
