#include "protoseg/synthetic.hpp"

#include <cmath>
#include <random>

namespace protoseg {

namespace {

constexpr int kBackgroundMeans = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  do {
    for (Index i = 0; i < n; ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-9);
  return v / v.norm();
}

struct ObjectGeometry {
  double cy, cx;  // center
  double ry, rx;  // vertical/horizontal half extent
};

ObjectGeometry draw_geometry(const SyntheticSpec& spec, double area_fraction,
                             std::mt19937_64& rng) {
  const double h = static_cast<double>(spec.height);
  const double w = static_cast<double>(spec.width);
  const double area = area_fraction * h * w;
  std::uniform_real_distribution<double> aspect_dist(0.7, 1.4);
  const double aspect = aspect_dist(rng);

  double rx, ry;
  if (spec.shape == ShapeFamily::Ellipse) {
    rx = std::sqrt(area * aspect / M_PI);
    ry = std::sqrt(area / (M_PI * aspect));
  } else {
    rx = 0.5 * std::sqrt(area * aspect);
    ry = 0.5 * std::sqrt(area / aspect);
  }
  rx = std::min(rx, (w - 1.0) / 2.0);
  ry = std::min(ry, (h - 1.0) / 2.0);

  std::uniform_real_distribution<double> cy_dist(ry, h - 1.0 - ry);
  std::uniform_real_distribution<double> cx_dist(rx, w - 1.0 - rx);
  return {cy_dist(rng), cx_dist(rng), ry, rx};
}

// Squared normalized radius: 1.0 on the object boundary, and also the area
// fraction enclosed (both for ellipses and for similar rectangles).
double radius2(const SyntheticSpec& spec, const ObjectGeometry& g, Index y, Index x) {
  const double dy = (static_cast<double>(y) - g.cy) / g.ry;
  const double dx = (static_cast<double>(x) - g.cx) / g.rx;
  if (spec.shape == ShapeFamily::Ellipse) return dx * dx + dy * dy;
  const double m = std::max(std::abs(dx), std::abs(dy));
  return m * m;
}

BinaryMask rasterize(const SyntheticSpec& spec, const ObjectGeometry& g) {
  MaskMatrix m = MaskMatrix::Zero(spec.height, spec.width);
  bool any = false;
  for (Index y = 0; y < spec.height; ++y) {
    for (Index x = 0; x < spec.width; ++x) {
      if (radius2(spec, g, y, x) <= 1.0) {
        m(y, x) = 1;
        any = true;
      }
    }
  }
  if (!any)
    m(static_cast<Index>(std::lround(g.cy)), static_cast<Index>(std::lround(g.cx))) = 1;
  return BinaryMask(std::move(m));
}

// Concentric bands of fixed pixel width, indexed from the object center
// outward. Absolute band widths tie the part mixture to the object size: a
// small object is mostly core while a large one is dominated by its outer
// band, which is what makes the support/query scale gap hard.
Index part_of(const SyntheticSpec& spec, const ObjectGeometry& g, Index y, Index x) {
  const double r_px =
      std::sqrt(std::clamp(radius2(spec, g, y, x), 0.0, 1.0) * g.rx * g.ry);
  return std::min<Index>(static_cast<Index>(r_px / spec.part_band), spec.parts - 1);
}

}  // namespace

void SyntheticSpec::validate() const {
  detail::require(channels >= 1, "SyntheticSpec: channels must be >= 1");
  detail::require(height >= 4 && width >= 4, "SyntheticSpec: grid must be at least 4x4");
  detail::require(support_scale > 0.0 && support_scale < 1.0,
                  "SyntheticSpec: support_scale must be in (0, 1)");
  detail::require(query_scale > 0.0 && query_scale < 1.0,
                  "SyntheticSpec: query_scale must be in (0, 1)");
  detail::require(separation >= 0.0, "SyntheticSpec: separation must be >= 0");
  detail::require(noise >= 0.0, "SyntheticSpec: noise must be >= 0");
  detail::require(parts >= 1, "SyntheticSpec: parts must be >= 1");
  detail::require(part_spread >= 0.0, "SyntheticSpec: part_spread must be >= 0");
  detail::require(part_band > 0.0, "SyntheticSpec: part_band must be positive");
  detail::require(shots >= 1, "SyntheticSpec: shots must be >= 1");
}

Episode gen_episode(const SyntheticSpec& spec, int index) {
  spec.validate();
  detail::require(index >= 0, "gen_episode: index must be >= 0");
  std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(index))));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> bg_pick(0, kBackgroundMeans - 1);

  // Class means carry `separation` per channel on average (norm scales with
  // sqrt(C)), so the per-channel signal-to-noise ratio is separation/noise.
  const double magnitude = spec.separation * std::sqrt(static_cast<double>(spec.channels));
  const Vector class_dir = random_unit(spec.channels, rng);

  // Orthonormal basis of the directions used so far; new directions are drawn
  // orthogonal to it (as far as the channel count allows), so part means stay
  // mutually distinct and background means stay away from every part.
  std::vector<Vector> basis{class_dir};
  const auto fresh_direction = [&] {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector dir = random_unit(spec.channels, rng);
      for (const Vector& b : basis) dir -= dir.dot(b) * b;
      if (dir.norm() > 1e-6) {
        dir.normalize();
        if (static_cast<Index>(basis.size()) < spec.channels) basis.push_back(dir);
        return dir;
      }
    }
    // The basis already spans the space; settle for any direction off the
    // class mean.
    Vector dir = random_unit(spec.channels, rng);
    if (spec.channels > 1) {
      dir -= dir.dot(class_dir) * class_dir;
      if (dir.norm() > 1e-9) dir.normalize();
    }
    return dir;
  };

  // Part means spread around the shared class direction.
  std::vector<Vector> part_means;
  for (int j = 0; j < spec.parts; ++j)
    part_means.push_back(magnitude *
                         (class_dir + spec.part_spread * fresh_direction()).normalized());

  std::vector<Vector> bg_means;
  for (int i = 0; i < kBackgroundMeans; ++i) bg_means.push_back(magnitude * fresh_direction());

  const auto make_image = [&](double area_fraction) {
    const ObjectGeometry geometry = draw_geometry(spec, area_fraction, rng);
    const BinaryMask mask = rasterize(spec, geometry);
    MatrixRX f(spec.channels, spec.height * spec.width);
    for (Index p = 0; p < f.cols(); ++p) {
      const Index y = p / spec.width, x = p % spec.width;
      Vector v = mask.values()(y, x) != 0
                     ? part_means[static_cast<std::size_t>(part_of(spec, geometry, y, x))]
                     : bg_means[static_cast<std::size_t>(bg_pick(rng))];
      for (Index c = 0; c < spec.channels; ++c) v(c) += spec.noise * gauss(rng);
      f.col(p) = v;
    }
    return std::pair{FeatureMap(spec.height, spec.width, std::move(f)), mask};
  };

  Episode ep;
  for (int s = 0; s < spec.shots; ++s) {
    auto [features, mask] = make_image(spec.support_scale);
    ep.supports.push_back({std::move(features), std::move(mask)});
  }
  auto [query, truth] = make_image(spec.query_scale);
  ep.query = std::move(query);
  ep.truth = std::move(truth);
  return ep;
}

std::vector<Episode> gen_episodes(const SyntheticSpec& spec, int count) {
  detail::require(count >= 1, "gen_episodes: count must be >= 1");
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(gen_episode(spec, i));
  return out;
}

}  // namespace protoseg
