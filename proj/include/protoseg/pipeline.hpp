#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "protoseg/clustering.hpp"
#include "protoseg/enhancement.hpp"
#include "protoseg/matching.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// One annotated support sample.
struct Shot {
  FeatureMap features;
  BinaryMask mask;
};

/// One evaluation unit: K support shots plus a query of the same class.
struct Episode {
  std::vector<Shot> supports;
  FeatureMap query;
  std::optional<BinaryMask> truth;

  void validate() const;
};

/// Which prototype pools feed the matcher.
enum class PrototypeMode : std::uint8_t { KMeansOnly, SuperpixelOnly, Merged };

struct PipelineConfig {
  int n_clusters = 5;
  int max_superpixels = 5;
  std::vector<Scale> scales{{60, 60}, {30, 30}, {15, 15}, {8, 8}};
  int iterations = 4;
  double coord_weight = 1.0;
  int sgc_iterations = 10;
  double lambda_p = 1.0;
  double lambda_g = 1.0;
  std::uint64_t seed = 0;
  PrototypeMode prototype_mode = PrototypeMode::Merged;
  bool use_msie = true;
  bool use_qsce = true;
  /// When true, each refinement round adds its terms onto the probability
  /// pyramid freshly derived from the matcher instead of the carried state.
  bool rederive_p = false;

  void validate() const;
};

/// Maps the matched features onto a two-channel prediction. Implementations
/// must return a map at some resolution; the pipeline resizes the final
/// decision to the query resolution.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual TwoChannelMap decode(const FeatureMap& query, const MatchResult& match) const = 0;
};

/// Parameter-free default: fg logit = lambda_p * (2*minmax(P) - 1)
/// + lambda_g * cosine(query pixel, guide pixel); bg logit = -fg logit.
class CosineDecoder final : public Decoder {
 public:
  CosineDecoder(double lambda_p, double lambda_g) : lambda_p_(lambda_p), lambda_g_(lambda_g) {}
  TwoChannelMap decode(const FeatureMap& query, const MatchResult& match) const override;

 private:
  double lambda_p_;
  double lambda_g_;
};

struct RunMetrics {
  int iterations = 0;
  int qsce_fallbacks = 0;
  int skipped_empty_shots = 0;
  double wall_ms = 0.0;
};

struct PipelineResult {
  BinaryMask mask;
  /// Full-resolution probability map before refinement and after each round
  /// (iterations + 1 entries).
  std::vector<ScalarMap> per_iteration_maps;
  /// Argmax decision of each decode, same length as per_iteration_maps.
  std::vector<BinaryMask> per_iteration_masks;
  RunMetrics metrics;
};

/// Per shot: k-means and/or superpixel prototypes, merged k-means-first;
/// across shots the sets are concatenated in shot order. Shots with empty
/// masks are skipped; an episode whose every shot is empty raises
/// EmptyForegroundError.
PrototypeSet extract_prototypes(const Episode& episode, const PipelineConfig& cfg,
                                int* skipped_shots = nullptr);

/// Runs the default decoder configured from `cfg`.
TwoChannelMap decode(const FeatureMap& query, const MatchResult& match,
                     const PipelineConfig& cfg);

PipelineResult run_episode(const Episode& episode, const PipelineConfig& cfg);
PipelineResult run_episode(const Episode& episode, const PipelineConfig& cfg,
                           const Decoder& decoder);

}  // namespace protoseg
