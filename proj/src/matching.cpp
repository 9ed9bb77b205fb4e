#include "protoseg/matching.hpp"

#include "protoseg/ops.hpp"

namespace protoseg {

SimilarityStack::SimilarityStack(std::vector<ScalarMap> maps) : maps_(std::move(maps)) {
  detail::require(!maps_.empty(), "SimilarityStack: empty");
  for (const auto& m : maps_) {
    detail::require(m.height() == maps_.front().height() && m.width() == maps_.front().width(),
                    "SimilarityStack: inconsistent dims");
    detail::require(m.values().minCoeff() >= -1.0 && m.values().maxCoeff() <= 1.0,
                    "SimilarityStack: similarity outside [-1, 1]");
  }
}

SimilarityStack similarity_stack(const FeatureMap& query, const PrototypeSet& protos) {
  detail::require(query.channels() == protos.channels(),
                  "similarity_stack: channel count mismatch");
  const MatrixRX& q = query.channels_by_pixels();
  const MatrixRX p = protos.as_matrix();
  const Eigen::RowVectorXd q_norm = q.colwise().norm();
  const Eigen::VectorXd p_norm = p.colwise().norm();
  const MatrixRX dots = p.transpose() * q;  // protos × pixels

  std::vector<ScalarMap> maps;
  maps.reserve(static_cast<std::size_t>(protos.size()));
  for (Index i = 0; i < protos.size(); ++i) {
    const ArrayRX sim = (dots.row(i).array() / (p_norm(i) * q_norm.array() + kDenomEps))
                            .cwiseMax(-1.0)
                            .cwiseMin(1.0);
    maps.emplace_back(
        Eigen::Map<const MatrixRX>(sim.eval().data(), query.height(), query.width()));
  }
  return SimilarityStack(std::move(maps));
}

GuideMap guide_map(const SimilarityStack& stack) {
  detail::require(stack.size() > 0, "guide_map: empty stack");
  IndexMatrix indices(stack.height(), stack.width());
  for (Index y = 0; y < stack.height(); ++y) {
    for (Index x = 0; x < stack.width(); ++x) {
      Index best = 0;
      double best_sim = stack[0](y, x);
      for (Index i = 1; i < stack.size(); ++i) {
        const double s = stack[i](y, x);
        if (s > best_sim) {
          best_sim = s;
          best = i;
        }
      }
      indices(y, x) = static_cast<std::int32_t>(best);
    }
  }
  return GuideMap(std::move(indices));
}

FeatureMap gather_guide_features(const GuideMap& guide, const PrototypeSet& protos) {
  MatrixRX out(protos.channels(), guide.height() * guide.width());
  for (Index y = 0; y < guide.height(); ++y) {
    for (Index x = 0; x < guide.width(); ++x) {
      const std::int32_t i = guide(y, x);
      if (i < 0 || i >= protos.size())
        throw std::logic_error("gather_guide_features: guide index out of range");
      out.col(y * guide.width() + x) = protos[i].vector;
    }
  }
  return FeatureMap(guide.height(), guide.width(), std::move(out));
}

ScalarMap probability_map(const SimilarityStack& stack) {
  detail::require(stack.size() > 0, "probability_map: empty stack");
  MatrixRX acc = stack[0].values();
  for (Index i = 1; i < stack.size(); ++i) acc += stack[i].values();
  return ScalarMap(std::move(acc));
}

MatchResult match_prototypes(const FeatureMap& query, const PrototypeSet& protos) {
  const SimilarityStack stack = similarity_stack(query, protos);
  GuideMap guide = guide_map(stack);
  FeatureMap features = gather_guide_features(guide, protos);
  return {std::move(guide), std::move(features), probability_map(stack)};
}

}  // namespace protoseg
