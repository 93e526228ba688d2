#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vvnet/common.hpp"

namespace vvnet {

using Point3 = std::array<double, 3>;

struct LabeledPointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<int>> labels;  // same length as points when present

  int n() const { return static_cast<int>(points.size()); }

  bool has_labels() const { return labels.has_value(); }
};

struct Aabb {
  Point3 min{0, 0, 0};
  Point3 max{0, 0, 0};

  // extents along X, Y, Z; these are the ranges the grid divides
  double extent(int axis) const { return max[static_cast<std::size_t>(axis)] - min[static_cast<std::size_t>(axis)]; }
};

inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline Aabb bounding_box(const LabeledPointCloud& cloud) {
  require(cloud.n() >= 1, ErrorCategory::domain, "bounding_box: empty cloud");
  Aabb box;
  box.min = box.max = cloud.points[0];
  for (const auto& p : cloud.points)
    for (int a = 0; a < 3; ++a) {
      box.min[static_cast<std::size_t>(a)] = std::min(box.min[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(a)]);
      box.max[static_cast<std::size_t>(a)] = std::max(box.max[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(a)]);
    }
  return box;
}

// Text format: one point per line, "x y z" or "x y z label". Blank lines are
// skipped; Unix and Windows line endings both accepted.
inline LabeledPointCloud load_cloud(const std::string& path, bool has_labels) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open point file: " + path);
  LabeledPointCloud cloud;
  if (has_labels) cloud.labels.emplace();
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;

    std::istringstream ls(line);
    Point3 p;
    for (int a = 0; a < 3; ++a)
      require(static_cast<bool>(ls >> p[static_cast<std::size_t>(a)]), ErrorCategory::parse,
              path + ":" + std::to_string(line_no) + ": malformed point line");
    for (int a = 0; a < 3; ++a)
      require(std::isfinite(p[static_cast<std::size_t>(a)]), ErrorCategory::parse,
              path + ":" + std::to_string(line_no) + ": non-finite coordinate");
    if (has_labels) {
      long lab;
      require(static_cast<bool>(ls >> lab), ErrorCategory::parse,
              path + ":" + std::to_string(line_no) + ": missing label");
      require(lab >= 0, ErrorCategory::parse,
              path + ":" + std::to_string(line_no) + ": negative label");
      cloud.labels->push_back(static_cast<int>(lab));
    }
    std::string rest;
    ls >> rest;
    require(rest.empty(), ErrorCategory::parse,
            path + ":" + std::to_string(line_no) + ": trailing tokens");
    cloud.points.push_back(p);
  }
  require(cloud.n() >= 1, ErrorCategory::parse, path + ": zero points");
  return cloud;
}

inline void save_cloud(const LabeledPointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCategory::io, "cannot write point file: " + path);
  char buf[96];
  for (int i = 0; i < cloud.n(); ++i) {
    const auto& p = cloud.points[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p[0], p[1], p[2]);
    out << buf;
    if (cloud.has_labels()) out << ' ' << (*cloud.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  require(out.good(), ErrorCategory::io, "write failed: " + path);
}

// Greedy farthest point sampling. The start index is seed mod n; every
// subsequent pick maximizes the minimum distance to the already selected
// set, ties broken by lowest index. Returns indices in selection order.
inline std::vector<int> farthest_point_sample(const LabeledPointCloud& cloud, int count,
                                              std::uint64_t seed) {
  const int n = cloud.n();
  require(count >= 1, ErrorCategory::domain, "farthest_point_sample: count must be >= 1");
  require(count <= n, ErrorCategory::domain, "farthest_point_sample: count exceeds point count");

  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(count));
  std::vector<double> min_sq(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> taken(static_cast<std::size_t>(n), 0);

  int current = static_cast<int>(seed % static_cast<std::uint64_t>(n));
  picked.push_back(current);
  taken[static_cast<std::size_t>(current)] = 1;
  for (int step = 1; step < count; ++step) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      double d = squared_distance(cloud.points[static_cast<std::size_t>(i)],
                                  cloud.points[static_cast<std::size_t>(current)]);
      if (d < min_sq[static_cast<std::size_t>(i)]) min_sq[static_cast<std::size_t>(i)] = d;
      if (!taken[static_cast<std::size_t>(i)] && min_sq[static_cast<std::size_t>(i)] > best_d) {
        best_d = min_sq[static_cast<std::size_t>(i)];
        best = i;
      }
    }
    picked.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
    current = best;
  }
  return picked;
}

inline LabeledPointCloud subsample(const LabeledPointCloud& cloud, const std::vector<int>& indices) {
  LabeledPointCloud out;
  if (cloud.has_labels()) out.labels.emplace();
  for (int i : indices) {
    out.points.push_back(cloud.points[static_cast<std::size_t>(i)]);
    if (cloud.has_labels()) out.labels->push_back((*cloud.labels)[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace vvnet
