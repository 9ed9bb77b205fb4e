#include "protoseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace protoseg {

namespace {

constexpr int kLloydCap = 20;

std::vector<Index> foreground_indices(const BinaryMask& mask) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(mask.foreground_count()));
  const auto& m = mask.values();
  for (Index y = 0; y < mask.height(); ++y)
    for (Index x = 0; x < mask.width(); ++x)
      if (m(y, x) != 0) out.push_back(y * mask.width() + x);
  return out;
}

void check_dims(const FeatureMap& features, const BinaryMask& mask, const char* op) {
  detail::require(features.height() == mask.height() && features.width() == mask.width(),
                  std::string(op) + ": mask dims do not match feature dims");
}

}  // namespace

PrototypeSet::PrototypeSet(std::vector<Prototype> prototypes) : protos_(std::move(prototypes)) {
  detail::require(!protos_.empty(), "PrototypeSet: empty");
  channels_ = protos_.front().vector.size();
  detail::require(channels_ > 0, "PrototypeSet: zero-channel prototype");
  for (std::size_t i = 0; i < protos_.size(); ++i) {
    detail::require(protos_[i].vector.size() == channels_,
                    "PrototypeSet: inconsistent channel counts");
    detail::require(detail::all_finite(protos_[i].vector), "PrototypeSet: non-finite prototype");
    protos_[i].index = static_cast<int>(i);
  }
}

MatrixRX PrototypeSet::as_matrix() const {
  MatrixRX m(channels_, size());
  for (Index i = 0; i < size(); ++i) m.col(i) = protos_[static_cast<std::size_t>(i)].vector;
  return m;
}

PrototypeSet PrototypeSet::concatenate(const std::vector<PrototypeSet>& sets) {
  std::vector<Prototype> all;
  for (const auto& s : sets) all.insert(all.end(), s.begin(), s.end());
  return PrototypeSet(std::move(all));
}

KMeansResult masked_kmeans(const FeatureMap& features, const BinaryMask& mask, int n_clusters,
                           std::uint64_t seed, std::vector<double>* objective_trace) {
  check_dims(features, mask, "masked_kmeans");
  detail::require(n_clusters >= 1, "masked_kmeans: n_clusters must be >= 1");
  if (objective_trace) objective_trace->clear();

  const std::vector<Index> fg = foreground_indices(mask);
  const Index m = static_cast<Index>(fg.size());
  if (m == 0) throw EmptyForegroundError("masked_kmeans: mask has no foreground pixels");

  const Index c = features.channels();
  MatrixRX points(c, m);
  for (Index j = 0; j < m; ++j) points.col(j) = features.pixel(fg[static_cast<std::size_t>(j)]);

  // Too few points: every foreground pixel becomes its own cluster.
  if (m < n_clusters) {
    std::vector<Prototype> protos;
    ClusterAssignment assign;
    for (Index j = 0; j < m; ++j) {
      protos.push_back({points.col(j), PrototypeSource::KMeans, static_cast<int>(j)});
      assign.labels.push_back(j);
    }
    assign.objective = 0.0;
    if (objective_trace) objective_trace->push_back(0.0);
    return {PrototypeSet(std::move(protos)), std::move(assign)};
  }

  const Index k = n_clusters;
  std::mt19937_64 rng(seed);

  // Farthest-point init. First center: max norm, lowest flat index on ties.
  MatrixRX centers(c, k);
  {
    Index first = 0;
    double best = points.col(0).squaredNorm();
    for (Index j = 1; j < m; ++j) {
      const double n2 = points.col(j).squaredNorm();
      if (n2 > best) {
        best = n2;
        first = j;
      }
    }
    centers.col(0) = points.col(first);

    Eigen::VectorXd d2 = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    for (Index ci = 1; ci < k; ++ci) {
      const double far = d2.maxCoeff();
      std::vector<Index> tied;
      for (Index j = 0; j < m; ++j)
        if (d2(j) == far) tied.push_back(j);
      const Index pick =
          tied.size() == 1 ? tied[0] : tied[rng() % static_cast<std::uint64_t>(tied.size())];
      centers.col(ci) = points.col(pick);
      d2 = d2.cwiseMin((points.colwise() - centers.col(ci)).colwise().squaredNorm().transpose());
    }
  }

  const auto assign_to_nearest = [&](std::vector<Index>& labels) {
    for (Index j = 0; j < m; ++j) {
      Index best = 0;
      double bestd = (points.col(j) - centers.col(0)).squaredNorm();
      for (Index ci = 1; ci < k; ++ci) {
        const double d = (points.col(j) - centers.col(ci)).squaredNorm();
        if (d < bestd) {
          bestd = d;
          best = ci;
        }
      }
      labels[static_cast<std::size_t>(j)] = best;
    }
  };

  std::vector<Index> labels(static_cast<std::size_t>(m));
  assign_to_nearest(labels);

  double objective = 0.0;
  for (int iter = 0; iter < kLloydCap; ++iter) {
    // Centroid update with empty-cluster repair: an empty cluster steals the
    // point of the largest cluster that lies farthest from that cluster's
    // current mean.
    MatrixRX sums = MatrixRX::Zero(c, k);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Index j = 0; j < m; ++j) {
      sums.col(labels[static_cast<std::size_t>(j)]) += points.col(j);
      counts(labels[static_cast<std::size_t>(j)]) += 1;
    }
    for (Index e = 0; e < k; ++e) {
      if (counts(e) != 0) continue;
      Index donor = 0;
      for (Index ci = 1; ci < k; ++ci)
        if (counts(ci) > counts(donor)) donor = ci;
      const Vector donor_mean = sums.col(donor) / counts(donor);
      Index steal = -1;
      double far = -1.0;
      for (Index j = 0; j < m; ++j) {
        if (labels[static_cast<std::size_t>(j)] != donor) continue;
        const double d = (points.col(j) - donor_mean).squaredNorm();
        if (d > far) {
          far = d;
          steal = j;
        }
      }
      labels[static_cast<std::size_t>(steal)] = e;
      sums.col(donor) -= points.col(steal);
      counts(donor) -= 1;
      sums.col(e) = points.col(steal);
      counts(e) = 1;
    }
    for (Index ci = 0; ci < k; ++ci) centers.col(ci) = sums.col(ci) / counts(ci);

    objective = 0.0;
    for (Index j = 0; j < m; ++j)
      objective += (points.col(j) - centers.col(labels[static_cast<std::size_t>(j)])).squaredNorm();
    if (objective_trace) objective_trace->push_back(objective);

    if (iter == kLloydCap - 1) break;
    std::vector<Index> next(static_cast<std::size_t>(m));
    assign_to_nearest(next);
    if (next == labels) break;
    labels = std::move(next);
  }

  std::vector<Prototype> protos;
  protos.reserve(static_cast<std::size_t>(k));
  for (Index ci = 0; ci < k; ++ci)
    protos.push_back({centers.col(ci), PrototypeSource::KMeans, static_cast<int>(ci)});
  return {PrototypeSet(std::move(protos)), ClusterAssignment{std::move(labels), objective}};
}

SuperpixelDetail superpixel_cluster_detail(const FeatureMap& features, const BinaryMask& mask,
                                           int max_superpixels, int iterations,
                                           double coord_weight) {
  check_dims(features, mask, "superpixel_cluster");
  detail::require(max_superpixels >= 1, "superpixel_cluster: max_superpixels must be >= 1");
  detail::require(iterations >= 0, "superpixel_cluster: iterations must be >= 0");

  const std::vector<Index> fg = foreground_indices(mask);
  const Index m = static_cast<Index>(fg.size());
  if (m == 0) throw EmptyForegroundError("superpixel_cluster: mask has no foreground pixels");

  const Index h = features.height();
  const Index w = features.width();
  const Index c = features.channels();

  const double cell = static_cast<double>(h * w) / static_cast<double>(max_superpixels);
  const Index wanted = std::clamp<Index>(static_cast<Index>(std::llround(m / cell)), 1,
                                         static_cast<Index>(max_superpixels));

  // Bounding box of the foreground.
  Index y_min = h, y_max = -1, x_min = w, x_max = -1;
  for (Index p : fg) {
    const Index y = p / w, x = p % w;
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }
  const double bh = static_cast<double>(y_max - y_min + 1);
  const double bw = static_cast<double>(x_max - x_min + 1);

  // Aspect-aware uniform grid over the bounding box; the first `wanted` cells
  // in row-major order carry a seed.
  const Index grid_rows = std::clamp<Index>(
      static_cast<Index>(std::llround(std::sqrt(static_cast<double>(wanted) * bh / bw))), 1,
      wanted);
  const Index grid_cols = (wanted + grid_rows - 1) / grid_rows;

  std::vector<Index> seeds;  // flat pixel indices, deduplicated
  for (Index r = 0; r < grid_rows && static_cast<Index>(seeds.size()) < wanted; ++r) {
    for (Index col = 0; col < grid_cols && static_cast<Index>(seeds.size()) < wanted; ++col) {
      const double sy = y_min + (r + 0.5) * bh / grid_rows;
      const double sx = x_min + (col + 0.5) * bw / grid_cols;
      // Snap to the nearest foreground pixel, lowest flat index on ties.
      Index best = fg[0];
      double bestd = std::numeric_limits<double>::infinity();
      for (Index p : fg) {
        const double dy = static_cast<double>(p / w) - sy;
        const double dx = static_cast<double>(p % w) - sx;
        const double d = dy * dy + dx * dx;
        if (d < bestd) {
          bestd = d;
          best = p;
        }
      }
      if (std::find(seeds.begin(), seeds.end(), best) == seeds.end()) seeds.push_back(best);
    }
  }
  const Index ns = static_cast<Index>(seeds.size());

  // Feature vectors augmented with weighted normalized coordinates.
  MatrixRX aug(c + 2, m);
  for (Index j = 0; j < m; ++j) {
    const Index p = fg[static_cast<std::size_t>(j)];
    aug.col(j).head(c) = features.pixel(p);
    aug(c, j) = coord_weight * static_cast<double>(p % w) / static_cast<double>(w);
    aug(c + 1, j) = coord_weight * static_cast<double>(p / w) / static_cast<double>(h);
  }

  MatrixRX centers(c + 2, ns);
  for (Index r = 0; r < ns; ++r) {
    const Index p = seeds[static_cast<std::size_t>(r)];
    Index j = static_cast<Index>(std::find(fg.begin(), fg.end(), p) - fg.begin());
    centers.col(r) = aug.col(j);
  }

  Eigen::MatrixXd assoc;  // ns × m
  for (int it = 0; it < iterations; ++it) {
    assoc.resize(ns, m);
    for (Index j = 0; j < m; ++j) {
      Eigen::VectorXd neg_d2(ns);
      for (Index r = 0; r < ns; ++r) neg_d2(r) = -(aug.col(j) - centers.col(r)).squaredNorm();
      const Eigen::VectorXd e = (neg_d2.array() - neg_d2.maxCoeff()).exp();
      assoc.col(j) = e / e.sum();
    }
    for (Index r = 0; r < ns; ++r) {
      const double total = assoc.row(r).sum();
      centers.col(r) = (aug * assoc.row(r).transpose()) / total;
    }
  }

  std::vector<Prototype> protos;
  protos.reserve(static_cast<std::size_t>(ns));
  for (Index r = 0; r < ns; ++r)
    protos.push_back({centers.col(r).head(c), PrototypeSource::Superpixel, static_cast<int>(r)});
  return {PrototypeSet(std::move(protos)), std::move(assoc), fg};
}

PrototypeSet superpixel_cluster(const FeatureMap& features, const BinaryMask& mask,
                                int max_superpixels, int iterations, double coord_weight) {
  return superpixel_cluster_detail(features, mask, max_superpixels, iterations, coord_weight)
      .prototypes;
}

PrototypeSet merge_prototypes(const PrototypeSet& kmc, const PrototypeSet& sgc) {
  detail::require(kmc.channels() == sgc.channels(), "merge_prototypes: channel mismatch");
  std::vector<Prototype> all;
  all.reserve(static_cast<std::size_t>(kmc.size() + sgc.size()));
  for (const auto& p : kmc) all.push_back({p.vector, PrototypeSource::KMeans, 0});
  for (const auto& p : sgc) all.push_back({p.vector, PrototypeSource::Superpixel, 0});
  return PrototypeSet(std::move(all));
}

}  // namespace protoseg
