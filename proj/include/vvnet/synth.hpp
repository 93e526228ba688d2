#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/pointcloud.hpp"
#include "vvnet/segnet.hpp"

namespace vvnet {

// Labeled primitive assemblies standing in for the part-segmentation
// categories: every category has between two and five parts.
enum class ShapeKind { table, chair, lamp, rocket };

inline const char* shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::table: return "table";
    case ShapeKind::chair: return "chair";
    case ShapeKind::lamp: return "lamp";
    case ShapeKind::rocket: return "rocket";
  }
  return "?";
}

inline ShapeKind shape_from_name(const std::string& s) {
  if (s == "table") return ShapeKind::table;
  if (s == "chair") return ShapeKind::chair;
  if (s == "lamp") return ShapeKind::lamp;
  if (s == "rocket") return ShapeKind::rocket;
  fail(ErrorCategory::config, "unknown shape kind: " + s);
}

inline constexpr int kShapeKinds = 4;

inline int shape_part_count(ShapeKind k) {
  switch (k) {
    case ShapeKind::table: return 2;   // top, legs
    case ShapeKind::chair: return 3;   // seat, back, legs
    case ShapeKind::lamp: return 3;    // base, pole, shade
    case ShapeKind::rocket: return 3;  // body, nose, fins
  }
  return 0;
}

namespace detail {

inline Point3 sample_box(Rng& rng, double x0, double x1, double y0, double y1, double z0,
                         double z1) {
  return {rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(z0, z1)};
}

// solid disk cross-section: radius r*sqrt(u) keeps density uniform
inline Point3 sample_cylinder(Rng& rng, double cx, double cy, double radius, double z0, double z1) {
  const double r = radius * std::sqrt(rng.uniform());
  const double a = rng.uniform(0.0, 6.283185307179586);
  return {cx + r * std::cos(a), cy + r * std::sin(a), rng.uniform(z0, z1)};
}

// cone/frustum interpolating radius r0 at z0 to r1 at z1
inline Point3 sample_frustum(Rng& rng, double r0, double r1, double z0, double z1) {
  const double z = rng.uniform(z0, z1);
  const double t = (z - z0) / (z1 - z0);
  const double rz = r0 + t * (r1 - r0);
  const double r = rz * std::sqrt(rng.uniform());
  const double a = rng.uniform(0.0, 6.283185307179586);
  return {r * std::cos(a), r * std::sin(a), z};
}

// Per-cloud dimensions so clouds of one category vary like a real catalog.
struct ShapeGeom {
  std::array<double, 6> p{};
};

inline ShapeGeom draw_geometry(ShapeKind kind, Rng& rng) {
  ShapeGeom g;
  switch (kind) {
    case ShapeKind::table:
      g.p = {rng.uniform(0.35, 0.50),   // top half extent
             rng.uniform(0.06, 0.12),   // top thickness
             rng.uniform(0.45, 0.60),   // top base height
             rng.uniform(0.030, 0.050), // leg half width
             0, 0};
      break;
    case ShapeKind::chair:
      g.p = {rng.uniform(0.25, 0.40),   // seat half extent
             rng.uniform(0.30, 0.45),   // seat height
             rng.uniform(0.75, 1.05),   // back top
             rng.uniform(0.025, 0.040), // leg half width
             rng.uniform(0.055, 0.085), // back thickness
             0};
      break;
    case ShapeKind::lamp:
      g.p = {rng.uniform(0.20, 0.32),   // base radius
             rng.uniform(0.025, 0.050), // pole radius
             rng.uniform(0.70, 0.95),   // pole top
             rng.uniform(0.10, 0.14),   // shade top radius (at pole top)
             rng.uniform(0.22, 0.34),   // shade bottom radius
             0};
      break;
    case ShapeKind::rocket:
      g.p = {rng.uniform(0.09, 0.15),   // body radius
             rng.uniform(0.55, 0.75),   // body top
             rng.uniform(0.25, 0.35),   // nose length
             rng.uniform(0.10, 0.18),   // fin span beyond the hull
             rng.uniform(0.12, 0.22),   // fin height
             0};
      break;
  }
  return g;
}

inline Point3 sample_part(ShapeKind kind, int part, const ShapeGeom& g, Rng& rng) {
  switch (kind) {
    case ShapeKind::table: {
      const double X = g.p[0], T = g.p[1], Z = g.p[2], L = g.p[3];
      if (part == 0) return sample_box(rng, -X, X, -X, X, Z, Z + T);  // top
      const int leg = static_cast<int>(rng.below(4));
      const double cx = (leg & 1) ? X - 0.07 : -(X - 0.07);
      const double cy = (leg & 2) ? X - 0.07 : -(X - 0.07);
      return sample_box(rng, cx - L, cx + L, cy - L, cy + L, 0.0, Z);
    }
    case ShapeKind::chair: {
      const double X = g.p[0], SZ = g.p[1], BT = g.p[2], L = g.p[3], B = g.p[4];
      if (part == 0) return sample_box(rng, -X, X, -X, X, SZ, SZ + 0.08);        // seat
      if (part == 1) return sample_box(rng, -X, X, X - B, X, SZ + 0.08, BT);     // back
      const int leg = static_cast<int>(rng.below(4));
      const double cx = (leg & 1) ? X - 0.05 : -(X - 0.05);
      const double cy = (leg & 2) ? X - 0.05 : -(X - 0.05);
      return sample_box(rng, cx - L, cx + L, cy - L, cy + L, 0.0, SZ);
    }
    case ShapeKind::lamp: {
      const double BR = g.p[0], PR = g.p[1], PT = g.p[2], ST = g.p[3], SB = g.p[4];
      if (part == 0) return sample_cylinder(rng, 0.0, 0.0, BR, 0.0, 0.05);  // base
      if (part == 1) return sample_cylinder(rng, 0.0, 0.0, PR, 0.05, PT);   // pole
      return sample_frustum(rng, ST, SB, PT, PT + 0.30);                    // shade
    }
    case ShapeKind::rocket: {
      const double R = g.p[0], BT = g.p[1], NL = g.p[2], FS = g.p[3], FH = g.p[4];
      if (part == 0) return sample_cylinder(rng, 0.0, 0.0, R, 0.0, BT);   // body
      if (part == 1) return sample_frustum(rng, R, 0.005, BT, BT + NL);   // nose
      const int fin = static_cast<int>(rng.below(4));
      const double r = rng.uniform(R, R + FS);
      const double t = rng.uniform(-0.012, 0.012);
      const double z = rng.uniform(0.0, FH);
      switch (fin) {
        case 0: return {r, t, z};
        case 1: return {-r, t, z};
        case 2: return {t, r, z};
        default: return {t, -r, z};
      }
    }
  }
  fail(ErrorCategory::domain, "bad shape part");
}

inline double part_fraction(ShapeKind kind, int part) {
  switch (kind) {
    case ShapeKind::table: return part == 0 ? 0.55 : 0.45;
    case ShapeKind::chair: return part == 0 ? 0.35 : (part == 1 ? 0.30 : 0.35);
    case ShapeKind::lamp: return part == 0 ? 0.30 : (part == 1 ? 0.25 : 0.45);
    case ShapeKind::rocket: return part == 0 ? 0.45 : (part == 1 ? 0.25 : 0.30);
  }
  return 0.0;
}

}  // namespace detail

namespace detail {

// random yaw: shapes stay upright but face an arbitrary direction
inline std::array<double, 9> random_rotation(Rng& rng) {
  const double a = rng.uniform(0.0, 6.283185307179586);
  const double c = std::cos(a), s = std::sin(a);
  return {c, -s, 0, s, c, 0, 0, 0, 1};
}

}  // namespace detail

// Deterministic labeled cloud of one shape; labels are the shape's local
// part ids. With noise_sd = 0 and no rotation all points lie exactly inside
// the primitives; random_orientation applies one random rotation about the
// vertical axis to the whole cloud. scale multiplies the assembled shape
// (noise_sd is in final units).
inline LabeledPointCloud synth_cloud(ShapeKind kind, int n_points, double noise_sd,
                                     std::uint64_t seed, bool random_orientation = false,
                                     double scale = 1.0) {
  const int parts = shape_part_count(kind);
  require(n_points >= parts, ErrorCategory::domain,
          "synth: need at least one point per part");

  // largest-remainder split of n_points over the part fractions
  std::vector<int> counts(static_cast<std::size_t>(parts), 1);
  int assigned = parts;
  std::vector<double> want(static_cast<std::size_t>(parts));
  for (int p = 0; p < parts; ++p)
    want[static_cast<std::size_t>(p)] = detail::part_fraction(kind, p) * n_points;
  while (assigned < n_points) {
    int best = 0;
    double best_gap = -1.0;
    for (int p = 0; p < parts; ++p) {
      const double gap = want[static_cast<std::size_t>(p)] - counts[static_cast<std::size_t>(p)];
      if (gap > best_gap) {
        best_gap = gap;
        best = p;
      }
    }
    ++counts[static_cast<std::size_t>(best)];
    ++assigned;
  }

  Rng rng(seed);
  std::array<double, 9> rot = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  if (random_orientation) rot = detail::random_rotation(rng);
  const detail::ShapeGeom geom = detail::draw_geometry(kind, rng);

  LabeledPointCloud cloud;
  cloud.labels.emplace();
  for (int p = 0; p < parts; ++p)
    for (int i = 0; i < counts[static_cast<std::size_t>(p)]; ++i) {
      Point3 pt = detail::sample_part(kind, p, geom, rng);
      if (random_orientation)
        pt = {rot[0] * pt[0] + rot[1] * pt[1] + rot[2] * pt[2],
              rot[3] * pt[0] + rot[4] * pt[1] + rot[5] * pt[2],
              rot[6] * pt[0] + rot[7] * pt[1] + rot[8] * pt[2]};
      for (auto& c : pt) c *= scale;
      if (noise_sd > 0.0)
        for (auto& c : pt) c += noise_sd * rng.normal();
      cloud.points.push_back(pt);
      cloud.labels->push_back(p);
    }
  return cloud;
}

// Global part-id layout over the four categories (ShapeNet style: each
// category owns a contiguous id range).
inline std::vector<std::vector<int>> synth_parts_by_category() {
  std::vector<std::vector<int>> parts;
  int next = 0;
  for (int c = 0; c < kShapeKinds; ++c) {
    std::vector<int> ids;
    for (int p = 0; p < shape_part_count(static_cast<ShapeKind>(c)); ++p) ids.push_back(next++);
    parts.push_back(std::move(ids));
  }
  return parts;
}

inline int synth_num_classes() {
  int total = 0;
  for (int c = 0; c < kShapeKinds; ++c) total += shape_part_count(static_cast<ShapeKind>(c));
  return total;
}

struct SynthDataset {
  std::vector<SegItem> train, test;
  std::vector<std::string> category_names;
  std::vector<std::vector<int>> parts_by_category;  // global ids per category
  int num_classes = 0;
};

// Balanced dataset over the four categories with per-cloud seeds derived
// from the master seed; labels are global part ids. Each cloud gets its own
// random orientation unless rotate is cleared. Shapes come out in room-like
// source units (the unit primitives scaled by `scale`).
inline SynthDataset make_synth_dataset(int n_clouds, int points_per_cloud, double noise_sd,
                                       std::uint64_t seed, double train_fraction = 0.8,
                                       bool rotate = true, double scale = 6.0) {
  require(n_clouds >= kShapeKinds, ErrorCategory::config, "need at least one cloud per category");
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCategory::config,
          "train_fraction must be in (0, 1)");
  SynthDataset ds;
  ds.parts_by_category = synth_parts_by_category();
  ds.num_classes = synth_num_classes();
  for (int c = 0; c < kShapeKinds; ++c)
    ds.category_names.push_back(shape_name(static_cast<ShapeKind>(c)));

  for (int i = 0; i < n_clouds; ++i) {
    const int cat = i % kShapeKinds;
    const ShapeKind kind = static_cast<ShapeKind>(cat);
    LabeledPointCloud cloud =
        synth_cloud(kind, points_per_cloud, noise_sd,
                    seed * 1000003ull + static_cast<std::uint64_t>(i), rotate, scale);
    const int offset = ds.parts_by_category[static_cast<std::size_t>(cat)].front();
    for (auto& lab : *cloud.labels) lab += offset;

    const int per_cat_index = i / kShapeKinds;
    const int per_cat_total = (n_clouds - cat + kShapeKinds - 1) / kShapeKinds;
    const int train_count = std::max(1, static_cast<int>(train_fraction * per_cat_total + 0.5));
    SegItem item{std::move(cloud), cat};
    if (per_cat_index < train_count)
      ds.train.push_back(std::move(item));
    else
      ds.test.push_back(std::move(item));
  }
  require(!ds.test.empty(), ErrorCategory::config, "dataset split produced no test clouds");
  return ds;
}

}  // namespace vvnet
