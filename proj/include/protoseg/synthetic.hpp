#pragma once

#include <cstdint>
#include <vector>

#include "protoseg/pipeline.hpp"

namespace protoseg {

enum class ShapeFamily : std::uint8_t { Ellipse, Rectangle };

/// Recipe for synthetic episodes: one class-specific feature direction per
/// episode, foreground = part mean + Gaussian noise, background = a few
/// distinct off-class means + noise. Objects are split into concentric
/// equal-area part bands whose means spread around the class direction, so a
/// single averaged prototype blurs parts while a richer pool can cover them.
/// Support and query objects share the class direction and part structure but
/// are drawn with independent geometry; the support/query scale gap is
/// controlled by the two area fractions.
struct SyntheticSpec {
  Index channels = 8;
  Index height = 60;
  Index width = 60;
  ShapeFamily shape = ShapeFamily::Ellipse;
  double support_scale = 0.16;  // object area as a fraction of the image
  double query_scale = 0.16;
  double separation = 2.0;  // per-channel class-mean separation
  double noise = 0.5;       // per-channel Gaussian sigma
  int parts = 3;             // foreground part modes
  double part_spread = 0.8;  // diversity of the part means around the class direction
  double part_band = 3.0;    // band width in pixels; ties part mixture to object size
  int shots = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic per (seed, index): the same episode comes back regardless of
/// how many episodes are generated around it.
Episode gen_episode(const SyntheticSpec& spec, int index);

std::vector<Episode> gen_episodes(const SyntheticSpec& spec, int count);

}  // namespace protoseg
