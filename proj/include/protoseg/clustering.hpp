#pragma once

#include <cstdint>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

enum class PrototypeSource : std::uint8_t { KMeans, Superpixel };

/// One C-dimensional prototype vector with its origin.
struct Prototype {
  Vector vector;
  PrototypeSource source = PrototypeSource::KMeans;
  int index = 0;  // position within its set; reassigned on merge/concat
};

/// Ordered, non-empty list of prototypes sharing a channel count.
class PrototypeSet {
 public:
  PrototypeSet() = default;
  explicit PrototypeSet(std::vector<Prototype> prototypes);

  Index size() const { return static_cast<Index>(protos_.size()); }
  Index channels() const { return channels_; }
  const Prototype& operator[](Index i) const { return protos_[static_cast<std::size_t>(i)]; }
  const std::vector<Prototype>& prototypes() const { return protos_; }
  auto begin() const { return protos_.begin(); }
  auto end() const { return protos_.end(); }

  /// C×n matrix with prototype i in column i (bitwise copies).
  MatrixRX as_matrix() const;

  /// Appends another set, retagging positions. Used for K-shot fusion.
  static PrototypeSet concatenate(const std::vector<PrototypeSet>& sets);

 private:
  std::vector<Prototype> protos_;
  Index channels_ = 0;
};

/// Per-foreground-pixel cluster labels (row-major scan order over foreground
/// pixels) and the final sum of squared distances to the assigned centers.
struct ClusterAssignment {
  std::vector<Index> labels;
  double objective = 0.0;
};

struct KMeansResult {
  PrototypeSet prototypes;
  ClusterAssignment assignment;
};

/// Lloyd k-means over the foreground feature vectors only. Initialization is a
/// deterministic farthest-point traversal started at the max-norm pixel with
/// the lowest flat index; the seed is consulted only to break exact distance
/// ties. When the foreground has fewer pixels than clusters, each pixel
/// becomes a singleton cluster. Runs at most 20 rounds or until the
/// assignment stops changing.
///
/// `objective_trace`, when given, receives the objective after every centroid
/// update (a non-increasing sequence).
KMeansResult masked_kmeans(const FeatureMap& features, const BinaryMask& mask, int n_clusters,
                           std::uint64_t seed, std::vector<double>* objective_trace = nullptr);

struct SuperpixelDetail {
  PrototypeSet prototypes;
  /// Softmax association used in the final center update, one row per
  /// superpixel and one column per foreground pixel. Empty when iterations==0.
  Eigen::MatrixXd association;
  /// Flat indices of the foreground pixels, row-major scan order.
  std::vector<Index> foreground;
};

/// Superpixel-guided clustering of the foreground. The superpixel count
/// adapts to the object size: N_s = clamp(round(m / (H*W / max_superpixels)),
/// 1, max_superpixels) with m the foreground pixel count. Seeds start on a
/// uniform grid over the mask's bounding box, snapped to the nearest
/// foreground pixel and deduplicated. Association between a pixel and every
/// center is the softmax over centers of the negated squared distance in
/// feature space augmented with coord_weight*(x/W, y/H); centers are updated
/// to the association-weighted mean for `iterations` rounds. Background
/// pixels carry zero association.
PrototypeSet superpixel_cluster(const FeatureMap& features, const BinaryMask& mask,
                                int max_superpixels, int iterations, double coord_weight);

SuperpixelDetail superpixel_cluster_detail(const FeatureMap& features, const BinaryMask& mask,
                                           int max_superpixels, int iterations,
                                           double coord_weight);

/// Ordered concatenation, k-means block first; sources are retagged by block
/// and indices renumbered by position.
PrototypeSet merge_prototypes(const PrototypeSet& kmc, const PrototypeSet& sgc);

}  // namespace protoseg
