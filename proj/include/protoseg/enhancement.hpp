#pragma once

#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

/// Target spatial size for a pooled map.
struct Scale {
  Index height = 0;
  Index width = 0;
  bool operator==(const Scale&) const = default;
};

/// Foreground/background channel pair of equal dims (logits or probabilities).
struct TwoChannelMap {
  ScalarMap fg;
  ScalarMap bg;

  TwoChannelMap(ScalarMap fg_in, ScalarMap bg_in) : fg(std::move(fg_in)), bg(std::move(bg_in)) {
    detail::require(fg.height() == bg.height() && fg.width() == bg.width(),
                    "TwoChannelMap: channel dims differ");
  }

  Index height() const { return fg.height(); }
  Index width() const { return fg.width(); }
};

/// Multi-scale enhancement terms: per scale, pool both channels, softmax, take
/// the foreground channel, min-max normalize, then map onto [-1, 1] with
/// 2x - 1.
std::vector<ScalarMap> msie(const TwoChannelMap& g, const std::vector<Scale>& scales);

/// Argmax decision: 1 where fg > bg, else 0 (ties go to background).
BinaryMask pseudo_mask(const TwoChannelMap& g);

/// Mean query feature over the pseudo-mask foreground. An all-background mask
/// falls back to the unmasked global mean; `used_fallback`, when given, is set
/// accordingly.
Vector query_prototype(const FeatureMap& query, const BinaryMask& pm,
                       bool* used_fallback = nullptr);

/// Self-contrast enhancement terms: cosine of every query pixel against the
/// pseudo-masked query prototype, gated by the min-max-normalized probability
/// map, mapped onto [-1, 1], then pooled to each scale.
std::vector<ScalarMap> qsce(const FeatureMap& query, const TwoChannelMap& g, const ScalarMap& p,
                            const std::vector<Scale>& scales, bool* used_fallback = nullptr);

/// Per-scale accumulation p + ms + sc.
std::vector<ScalarMap> enhance(const std::vector<ScalarMap>& p_scales,
                               const std::vector<ScalarMap>& ms,
                               const std::vector<ScalarMap>& sc);

}  // namespace protoseg
