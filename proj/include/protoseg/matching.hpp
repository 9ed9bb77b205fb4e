#pragma once

#include <vector>

#include "protoseg/clustering.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// One cosine similarity map per prototype, ordered as the prototype set.
class SimilarityStack {
 public:
  SimilarityStack() = default;
  explicit SimilarityStack(std::vector<ScalarMap> maps);

  Index size() const { return static_cast<Index>(maps_.size()); }
  Index height() const { return maps_.front().height(); }
  Index width() const { return maps_.front().width(); }
  const ScalarMap& operator[](Index i) const { return maps_[static_cast<std::size_t>(i)]; }
  const std::vector<ScalarMap>& maps() const { return maps_; }

 private:
  std::vector<ScalarMap> maps_;
};

/// Per-pixel index of the most similar prototype.
class GuideMap {
 public:
  GuideMap() = default;
  explicit GuideMap(IndexMatrix indices) : indices_(std::move(indices)) {
    detail::require(indices_.rows() > 0 && indices_.cols() > 0,
                    "GuideMap: dimensions must be positive");
    detail::require((indices_.array() >= 0).all(), "GuideMap: negative index");
  }

  Index height() const { return indices_.rows(); }
  Index width() const { return indices_.cols(); }
  std::int32_t operator()(Index y, Index x) const { return indices_(y, x); }
  const IndexMatrix& indices() const { return indices_; }

 private:
  IndexMatrix indices_;
};

struct MatchResult {
  GuideMap guide;
  FeatureMap guide_features;  // per pixel, the selected prototype vector (bitwise)
  ScalarMap prob;             // accumulated similarity
};

/// maps[i](y,x) = cosine(query(:,y,x), protos[i]).
SimilarityStack similarity_stack(const FeatureMap& query, const PrototypeSet& protos);

/// Per-pixel argmax over the stack; ties go to the lowest index.
GuideMap guide_map(const SimilarityStack& stack);

/// Per-pixel bitwise copy of the prototype selected by the guide map.
FeatureMap gather_guide_features(const GuideMap& guide, const PrototypeSet& protos);

/// Elementwise sum over the stack, accumulated in prototype order.
ScalarMap probability_map(const SimilarityStack& stack);

/// Runs the full allocation: stack, guide, gather, probability map.
MatchResult match_prototypes(const FeatureMap& query, const PrototypeSet& protos);

}  // namespace protoseg
