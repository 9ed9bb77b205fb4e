#include "protoseg/enhancement.hpp"

#include "protoseg/ops.hpp"

namespace protoseg {

std::vector<ScalarMap> msie(const TwoChannelMap& g, const std::vector<Scale>& scales) {
  std::vector<ScalarMap> out;
  out.reserve(scales.size());
  for (const Scale& s : scales) {
    detail::require(s.height <= g.height() && s.width <= g.width(),
                    "msie: scale exceeds input dims");
    const ScalarMap fg = adaptive_avg_pool(g.fg, s.height, s.width);
    const ScalarMap bg = adaptive_avg_pool(g.bg, s.height, s.width);
    const ScalarMap fg_prob = softmax2(fg, bg).first;
    out.push_back(affine_pm1(minmax_normalize(fg_prob), 2.0, 1.0));
  }
  return out;
}

BinaryMask pseudo_mask(const TwoChannelMap& g) {
  MaskMatrix m(g.height(), g.width());
  for (Index y = 0; y < g.height(); ++y)
    for (Index x = 0; x < g.width(); ++x) m(y, x) = g.fg(y, x) > g.bg(y, x) ? 1 : 0;
  return BinaryMask(std::move(m));
}

Vector query_prototype(const FeatureMap& query, const BinaryMask& pm, bool* used_fallback) {
  detail::require(query.height() == pm.height() && query.width() == pm.width(),
                  "query_prototype: mask dims do not match feature dims");
  const Index count = pm.foreground_count();
  if (used_fallback) *used_fallback = count == 0;
  if (count == 0)
    return query.channels_by_pixels().rowwise().mean();

  Vector weights(query.pixel_count());
  for (Index p = 0; p < query.pixel_count(); ++p)
    weights(p) = pm.values()(p / pm.width(), p % pm.width());
  return (query.channels_by_pixels() * weights) / static_cast<double>(count);
}

std::vector<ScalarMap> qsce(const FeatureMap& query, const TwoChannelMap& g, const ScalarMap& p,
                            const std::vector<Scale>& scales, bool* used_fallback) {
  detail::require(query.height() == g.height() && query.width() == g.width(),
                  "qsce: query and prediction dims differ");
  detail::require(query.height() == p.height() && query.width() == p.width(),
                  "qsce: query and probability dims differ");

  const Vector q_proto = query_prototype(query, pseudo_mask(g), used_fallback);

  MatrixRX contrast(query.height(), query.width());
  for (Index y = 0; y < query.height(); ++y)
    for (Index x = 0; x < query.width(); ++x) contrast(y, x) = cosine(q_proto, query.pixel(y, x));

  const ArrayRX gated =
      minmax_normalize(p).values().array() * (contrast.array() + 1.0) / 2.0;
  const ScalarMap full = affine_pm1(ScalarMap(gated.matrix()), 2.0, 1.0);

  std::vector<ScalarMap> out;
  out.reserve(scales.size());
  for (const Scale& s : scales) {
    detail::require(s.height <= full.height() && s.width <= full.width(),
                    "qsce: scale exceeds input dims");
    out.push_back(adaptive_avg_pool(full, s.height, s.width));
  }
  return out;
}

std::vector<ScalarMap> enhance(const std::vector<ScalarMap>& p_scales,
                               const std::vector<ScalarMap>& ms,
                               const std::vector<ScalarMap>& sc) {
  detail::require(p_scales.size() == ms.size() && p_scales.size() == sc.size(),
                  "enhance: list lengths differ");
  std::vector<ScalarMap> out;
  out.reserve(p_scales.size());
  for (std::size_t i = 0; i < p_scales.size(); ++i) {
    detail::require(p_scales[i].height() == ms[i].height() &&
                        p_scales[i].width() == ms[i].width() &&
                        p_scales[i].height() == sc[i].height() &&
                        p_scales[i].width() == sc[i].width(),
                    "enhance: per-scale dims differ");
    out.emplace_back(MatrixRX(p_scales[i].values() + ms[i].values() + sc[i].values()));
  }
  return out;
}

}  // namespace protoseg
