#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "vvnet/common.hpp"

namespace vvnet {

// IoU of one part id between two label arrays; an empty union counts as 1.
inline double part_iou(const std::vector<int>& gt, const std::vector<int>& pred, int part) {
  require(gt.size() == pred.size(), ErrorCategory::shape, "part_iou: length mismatch");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool a = gt[i] == part, b = pred[i] == part;
    if (a && b) ++inter;
    if (a || b) ++uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean of part_iou over the instance's part set, in part order.
inline double instance_miou(const std::vector<int>& gt, const std::vector<int>& pred,
                            const std::vector<int>& parts_of_instance) {
  require(!parts_of_instance.empty(), ErrorCategory::domain, "instance_miou: empty part set");
  double sum = 0.0;
  for (int part : parts_of_instance) sum += part_iou(gt, pred, part);
  return sum / static_cast<double>(parts_of_instance.size());
}

inline double overall_accuracy(const std::vector<int>& gt, const std::vector<int>& pred) {
  require(gt.size() == pred.size(), ErrorCategory::shape, "overall_accuracy: length mismatch");
  require(!gt.empty(), ErrorCategory::domain, "overall_accuracy: empty input");
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] == pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(gt.size());
}

struct EvalReport {
  std::map<int, double> per_part_iou;          // pooled over all points
  double instance_miou = 0.0;                  // mean over instances
  std::map<std::string, double> category_miou; // mean instance mIoU per category
  double overall_accuracy = 0.0;

  std::string to_table() const {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "overall_accuracy %.6f\n", overall_accuracy);
    out += line;
    std::snprintf(line, sizeof line, "instance_miou %.6f\n", instance_miou);
    out += line;
    for (const auto& [cat, v] : category_miou) {
      std::snprintf(line, sizeof line, "category_miou %s %.6f\n", cat.c_str(), v);
      out += line;
    }
    for (const auto& [part, v] : per_part_iou) {
      std::snprintf(line, sizeof line, "part_iou %d %.6f\n", part, v);
      out += line;
    }
    return out;
  }
};

}  // namespace vvnet
