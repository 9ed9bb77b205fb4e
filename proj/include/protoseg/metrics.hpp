#pragma once

#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

struct ClassIou {
  double iou = 1.0;
  /// The class never appeared in prediction or truth across the whole set;
  /// its IoU is 1 by convention and flagged here.
  bool absent = false;
};

struct MiouResult {
  ClassIou fg;
  ClassIou bg;
  /// Mean over {bg, fg} of IoU accumulated across the whole set.
  double miou = 0.0;
  std::vector<double> per_episode_miou;
  std::vector<double> per_episode_fg_iou;
  double mean_episode_miou = 0.0;
  double mean_episode_fg_iou = 0.0;
};

/// Two-class IoU. Intersections and unions are accumulated over the whole set
/// before dividing; per-episode values are reported alongside.
MiouResult miou(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& truths);

}  // namespace protoseg
