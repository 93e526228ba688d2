#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/pointcloud.hpp"

namespace vvnet {

enum class RbfKernel { gaussian, inverse_quadratic };
enum class Combine { max, sum };
// Whether a subvoxel sees only the points of its own voxel or the whole
// cloud. The default is local; global is exposed as a config switch.
enum class Neighborhood { local, global };

inline const char* kernel_name(RbfKernel k) {
  return k == RbfKernel::gaussian ? "gaussian" : "inverse_quadratic";
}

// D, H, W are voxel counts along the Z, Y, X axes; k subdivides each voxel
// edge; sigma is the kernel width in world units.
struct GridSpec {
  int D = 16, H = 16, W = 16;
  int k = 4;
  double sigma = 1.0;
  RbfKernel kernel = RbfKernel::gaussian;
  Combine combine = Combine::max;
  Neighborhood neighborhood = Neighborhood::local;

  void validate() const {
    require(D >= 1 && H >= 1 && W >= 1 && k >= 1, ErrorCategory::config,
            "grid dimensions must be positive");
    require(sigma > 0.0, ErrorCategory::config, "sigma must be positive");
  }

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(D) * H * W;
  }
  std::int64_t block_size() const {
    return static_cast<std::int64_t>(k) * k * k;
  }
};

// Pads zero-extent axes so every voxel size is positive.
inline Aabb padded_box(Aabb box) {
  constexpr double kPad = 1e-6;
  for (std::size_t a = 0; a < 3; ++a)
    if (box.max[a] - box.min[a] <= 0.0) box.max[a] = box.min[a] + kPad;
  return box;
}

inline Aabb padded_bounding_box(const LabeledPointCloud& cloud) {
  return padded_box(bounding_box(cloud));
}

// Voxel sizes (v_W, v_H, v_D) follow from the box extents along X, Y, Z.
inline double voxel_size(const GridSpec& spec, const Aabb& box, int axis) {
  const int counts[3] = {spec.W, spec.H, spec.D};  // axis 0=X, 1=Y, 2=Z
  return box.extent(axis) / counts[axis];
}

inline double min_voxel_size(const GridSpec& spec, const Aabb& box) {
  return std::min({voxel_size(spec, box, 0), voxel_size(spec, box, 1), voxel_size(spec, box, 2)});
}

// Half-open binning with the max face clamped into the last cell;
// total for any finite point.
inline std::array<int, 3> voxel_of(const Point3& p, const GridSpec& spec, const Aabb& box) {
  const Aabb b = padded_box(box);
  const int counts[3] = {spec.W, spec.H, spec.D};
  std::array<int, 3> whd{};  // per-axis index along X, Y, Z
  for (int a = 0; a < 3; ++a) {
    const double cell = b.extent(a) / counts[a];
    int idx = static_cast<int>(std::floor((p[static_cast<std::size_t>(a)] - b.min[static_cast<std::size_t>(a)]) / cell));
    if (idx < 0) idx = 0;
    if (idx >= counts[a]) idx = counts[a] - 1;
    whd[static_cast<std::size_t>(a)] = idx;
  }
  return {whd[2], whd[1], whd[0]};  // (d, h, w)
}

// Kernel response of a subvoxel center against a point set. Empty set -> 0.
inline double rbf_value(const Point3& center, const std::vector<Point3>& pts, const GridSpec& spec) {
  if (pts.empty()) return 0.0;
  const double sig2 = spec.sigma * spec.sigma;
  double acc = (spec.combine == Combine::max) ? -std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& v : pts) {
    const double d2 = squared_distance(center, v);
    double val;
    if (spec.kernel == RbfKernel::gaussian)
      val = std::exp(-d2 / (2.0 * sig2));
    else
      val = 1.0 / (1.0 + sig2 * d2);
    if (spec.combine == Combine::max)
      acc = std::max(acc, val);
    else
      acc += val;
  }
  return acc;
}

// (D, H, W, k, k, k) field of kernel responses, grid anchored to `box`
// (already padded). Values are stored last-axis-fastest with subvoxel axes
// ordered like the voxel axes (z, y, x).
struct SubvoxelTensor {
  std::vector<double> values;
  GridSpec spec;
  Aabb box;

  std::int64_t flat_voxel(int d, int h, int w) const {
    return (static_cast<std::int64_t>(d) * spec.H + h) * spec.W + w;
  }
  const double* block(int d, int h, int w) const {
    return values.data() + flat_voxel(d, h, w) * spec.block_size();
  }
  double* block(int d, int h, int w) {
    return values.data() + flat_voxel(d, h, w) * spec.block_size();
  }
};

struct OccupancyGrid {
  std::vector<std::uint8_t> bits;  // (D*k, H*k, W*k), last axis fastest
  int D = 0, H = 0, W = 0;         // cell counts (already multiplied by k)
};

namespace detail {

inline Point3 subvoxel_center(const GridSpec& spec, const Aabb& box, int d, int h, int w,
                              int sd, int sh, int sw) {
  const double vw = voxel_size(spec, box, 0);
  const double vh = voxel_size(spec, box, 1);
  const double vd = voxel_size(spec, box, 2);
  return Point3{box.min[0] + (w + (sw + 0.5) / spec.k) * vw,
                box.min[1] + (h + (sh + 0.5) / spec.k) * vh,
                box.min[2] + (d + (sd + 0.5) / spec.k) * vd};
}

inline void fill_voxel_block(SubvoxelTensor& out, const std::vector<Point3>& pts,
                             int d, int h, int w) {
  double* blk = out.block(d, h, w);
  const int k = out.spec.k;
  std::int64_t idx = 0;
  for (int sd = 0; sd < k; ++sd)
    for (int sh = 0; sh < k; ++sh)
      for (int sw = 0; sw < k; ++sw, ++idx) {
        if (pts.empty()) {
          blk[idx] = 0.0;
          continue;
        }
        const Point3 c = subvoxel_center(out.spec, out.box, d, h, w, sd, sh, sw);
        blk[idx] = rbf_value(c, pts, out.spec);
      }
}

}  // namespace detail

// Evaluates every subvoxel of every voxel. Voxels are independent, so the
// work is partitioned over `workers` threads by voxel index; each writes a
// disjoint block and the result is bit-identical for any worker count.
inline SubvoxelTensor voxelize(const LabeledPointCloud& cloud, const GridSpec& spec,
                               int workers = 1) {
  spec.validate();
  require(workers >= 1, ErrorCategory::config, "workers must be >= 1");
  SubvoxelTensor out;
  out.spec = spec;
  out.box = padded_bounding_box(cloud);
  out.values.assign(static_cast<std::size_t>(spec.voxel_count() * spec.block_size()), 0.0);

  const bool global = spec.neighborhood == Neighborhood::global;
  std::vector<std::vector<Point3>> buckets;
  std::vector<Point3> all_points;
  if (global) {
    all_points = cloud.points;
  } else {
    buckets.resize(static_cast<std::size_t>(spec.voxel_count()));
    for (const auto& p : cloud.points) {
      const auto [d, h, w] = voxel_of(p, spec, out.box);
      buckets[static_cast<std::size_t>(out.flat_voxel(d, h, w))].push_back(p);
    }
  }

  const std::int64_t total = spec.voxel_count();
  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t v = lo; v < hi; ++v) {
      const int d = static_cast<int>(v / (static_cast<std::int64_t>(spec.H) * spec.W));
      const int h = static_cast<int>((v / spec.W) % spec.H);
      const int w = static_cast<int>(v % spec.W);
      detail::fill_voxel_block(out, global ? all_points : buckets[static_cast<std::size_t>(v)], d, h, w);
    }
  };

  if (workers == 1 || total < 2) {
    run_range(0, total);
  } else {
    const int nw = static_cast<int>(std::min<std::int64_t>(workers, total));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) {
      const std::int64_t lo = total * t / nw;
      const std::int64_t hi = total * (t + 1) / nw;
      threads.emplace_back(run_range, lo, hi);
    }
    for (auto& th : threads) th.join();
  }
  return out;
}

// {0,1} grid at subvoxel resolution, same half-open binning.
inline OccupancyGrid occupancy(const LabeledPointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  OccupancyGrid grid;
  grid.D = spec.D * spec.k;
  grid.H = spec.H * spec.k;
  grid.W = spec.W * spec.k;
  grid.bits.assign(static_cast<std::size_t>(grid.D) * grid.H * grid.W, 0);

  GridSpec fine = spec;
  fine.D = grid.D;
  fine.H = grid.H;
  fine.W = grid.W;
  fine.k = 1;
  const Aabb box = padded_bounding_box(cloud);
  for (const auto& p : cloud.points) {
    const auto [d, h, w] = voxel_of(p, fine, box);
    grid.bits[(static_cast<std::size_t>(d) * grid.H + h) * grid.W + w] = 1;
  }
  return grid;
}

}  // namespace vvnet
