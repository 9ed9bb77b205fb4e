#include "protoseg/pipeline.hpp"

#include <chrono>

#include "protoseg/ops.hpp"

namespace protoseg {

void Episode::validate() const {
  detail::require(!supports.empty(), "Episode: at least one support shot required");
  for (const Shot& s : supports) {
    detail::require(s.features.channels() == query.channels(),
                    "Episode: support channels differ from query");
    detail::require(s.features.height() == s.mask.height() &&
                        s.features.width() == s.mask.width(),
                    "Episode: support mask dims differ from its features");
  }
  if (truth)
    detail::require(truth->height() == query.height() && truth->width() == query.width(),
                    "Episode: truth dims differ from query");
}

void PipelineConfig::validate() const {
  detail::require(n_clusters >= 1, "PipelineConfig: n_clusters must be >= 1");
  detail::require(max_superpixels >= 1, "PipelineConfig: max_superpixels must be >= 1");
  detail::require(sgc_iterations >= 0, "PipelineConfig: sgc_iterations must be >= 0");
  detail::require(iterations >= 0, "PipelineConfig: iterations must be >= 0");
  detail::require(!scales.empty(), "PipelineConfig: scales must be non-empty");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    detail::require(scales[i].height > 0 && scales[i].width > 0,
                    "PipelineConfig: scales must be positive");
    if (i > 0)
      detail::require(scales[i].height <= scales[i - 1].height &&
                          scales[i].width <= scales[i - 1].width,
                      "PipelineConfig: scales must be non-increasing");
  }
  detail::require(std::isfinite(lambda_p) && std::isfinite(lambda_g) &&
                      std::isfinite(coord_weight),
                  "PipelineConfig: non-finite weight");
}

PrototypeSet extract_prototypes(const Episode& episode, const PipelineConfig& cfg,
                                int* skipped_shots) {
  episode.validate();
  cfg.validate();

  std::vector<PrototypeSet> per_shot;
  int skipped = 0;
  for (const Shot& shot : episode.supports) {
    if (shot.mask.foreground_count() == 0) {
      ++skipped;
      continue;
    }
    switch (cfg.prototype_mode) {
      case PrototypeMode::KMeansOnly:
        per_shot.push_back(
            masked_kmeans(shot.features, shot.mask, cfg.n_clusters, cfg.seed).prototypes);
        break;
      case PrototypeMode::SuperpixelOnly:
        per_shot.push_back(superpixel_cluster(shot.features, shot.mask, cfg.max_superpixels,
                                              cfg.sgc_iterations, cfg.coord_weight));
        break;
      case PrototypeMode::Merged: {
        const PrototypeSet kmc =
            masked_kmeans(shot.features, shot.mask, cfg.n_clusters, cfg.seed).prototypes;
        const PrototypeSet sgc = superpixel_cluster(shot.features, shot.mask, cfg.max_superpixels,
                                                    cfg.sgc_iterations, cfg.coord_weight);
        per_shot.push_back(merge_prototypes(kmc, sgc));
        break;
      }
    }
  }
  if (skipped_shots) *skipped_shots = skipped;
  if (per_shot.empty())
    throw EmptyForegroundError("extract_prototypes: every support shot has an empty mask");
  return PrototypeSet::concatenate(per_shot);
}

TwoChannelMap CosineDecoder::decode(const FeatureMap& query, const MatchResult& match) const {
  detail::require(match.prob.height() == query.height() && match.prob.width() == query.width(),
                  "decode: probability dims differ from query");
  detail::require(match.guide_features.height() == query.height() &&
                      match.guide_features.width() == query.width() &&
                      match.guide_features.channels() == query.channels(),
                  "decode: guide feature dims differ from query");

  const ScalarMap norm_p = affine_pm1(minmax_normalize(match.prob), 2.0, 1.0);
  MatrixRX fg(query.height(), query.width());
  for (Index y = 0; y < query.height(); ++y)
    for (Index x = 0; x < query.width(); ++x)
      fg(y, x) = lambda_p_ * norm_p(y, x) +
                 lambda_g_ * cosine(query.pixel(y, x), match.guide_features.pixel(y, x));
  return TwoChannelMap(ScalarMap(fg), ScalarMap(MatrixRX(-fg)));
}

TwoChannelMap decode(const FeatureMap& query, const MatchResult& match,
                     const PipelineConfig& cfg) {
  return CosineDecoder(cfg.lambda_p, cfg.lambda_g).decode(query, match);
}

namespace {

// Pool when shrinking; interpolate when a target dimension grows.
ScalarMap resample(const ScalarMap& map, Index h, Index w) {
  if (h <= map.height() && w <= map.width()) return adaptive_avg_pool(map, h, w);
  return bilinear_resize(map, h, w);
}

BinaryMask to_query_resolution(const BinaryMask& mask, Index h, Index w) {
  if (mask.height() == h && mask.width() == w) return mask;
  MatrixRX real(mask.height(), mask.width());
  for (Index y = 0; y < mask.height(); ++y)
    for (Index x = 0; x < mask.width(); ++x) real(y, x) = mask(y, x);
  const MatrixRX up = bilinear_resize(real, h, w);
  MaskMatrix out(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) out(y, x) = up(y, x) > 0.5 ? 1 : 0;
  return BinaryMask(std::move(out));
}

}  // namespace

PipelineResult run_episode(const Episode& episode, const PipelineConfig& cfg) {
  return run_episode(episode, cfg, CosineDecoder(cfg.lambda_p, cfg.lambda_g));
}

PipelineResult run_episode(const Episode& episode, const PipelineConfig& cfg,
                           const Decoder& decoder) {
  const auto start = std::chrono::steady_clock::now();
  PipelineResult result;

  const PrototypeSet protos =
      extract_prototypes(episode, cfg, &result.metrics.skipped_empty_shots);
  const MatchResult match = match_prototypes(episode.query, protos);

  ScalarMap p = match.prob;
  std::vector<ScalarMap> base_pyramid;
  base_pyramid.reserve(cfg.scales.size());
  for (const Scale& s : cfg.scales) base_pyramid.push_back(resample(p, s.height, s.width));
  std::vector<ScalarMap> pyramid = base_pyramid;

  result.per_iteration_maps.push_back(p);
  TwoChannelMap g = decoder.decode(episode.query, match);
  result.per_iteration_masks.push_back(pseudo_mask(g));

  const bool refine = cfg.use_msie || cfg.use_qsce;
  for (int t = 0; t < cfg.iterations; ++t) {
    if (refine) {
      std::vector<ScalarMap> ms, sc;
      if (cfg.use_msie) {
        ms = msie(g, cfg.scales);
      } else {
        for (const Scale& s : cfg.scales) ms.push_back(ScalarMap::zeros(s.height, s.width));
      }
      if (cfg.use_qsce) {
        bool fallback = false;
        sc = qsce(episode.query, g, p, cfg.scales, &fallback);
        if (fallback) ++result.metrics.qsce_fallbacks;
      } else {
        for (const Scale& s : cfg.scales) sc.push_back(ScalarMap::zeros(s.height, s.width));
      }
      pyramid = enhance(cfg.rederive_p ? base_pyramid : pyramid, ms, sc);
      p = bilinear_resize(pyramid.front(), episode.query.height(), episode.query.width());
    }
    result.per_iteration_maps.push_back(p);
    g = decoder.decode(episode.query, MatchResult{match.guide, match.guide_features, p});
    result.per_iteration_masks.push_back(pseudo_mask(g));
  }

  result.mask =
      to_query_resolution(pseudo_mask(g), episode.query.height(), episode.query.width());
  result.metrics.iterations = cfg.iterations;
  result.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace protoseg
