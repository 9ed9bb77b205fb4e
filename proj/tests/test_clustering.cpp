#include <doctest.h>

#include <algorithm>
#include <functional>
#include <cstring>
#include <random>
#include <vector>

#include "protoseg/clustering.hpp"

using namespace protoseg;

namespace {

FeatureMap make_features(Index c, Index h, Index w, const std::vector<double>& flat) {
  return Tensor({c, h, w}, Eigen::Map<const Vector>(flat.data(), static_cast<Index>(flat.size())))
      .to_feature_map();
}

BinaryMask make_mask(Index h, Index w, const std::vector<int>& flat) {
  MaskMatrix m(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) m(y, x) = static_cast<std::uint8_t>(flat[y * w + x]);
  return BinaryMask(m);
}

FeatureMap random_features(Index c, Index h, Index w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  MatrixRX f(c, h * w);
  for (Index i = 0; i < f.rows(); ++i)
    for (Index j = 0; j < f.cols(); ++j) f(i, j) = dist(rng);
  return FeatureMap(h, w, std::move(f));
}

BinaryMask random_mask(Index h, Index w, std::mt19937_64& rng, double p_fg = 0.5) {
  std::bernoulli_distribution coin(p_fg);
  MaskMatrix m(h, w);
  bool any = false;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      m(y, x) = coin(rng) ? 1 : 0;
      any = any || m(y, x);
    }
  if (!any) m(h / 2, w / 2) = 1;
  return BinaryMask(m);
}

std::vector<Vector> masked_vectors(const FeatureMap& f, const BinaryMask& mask) {
  std::vector<Vector> out;
  for (Index p = 0; p < f.pixel_count(); ++p)
    if (mask.values()(p / f.width(), p % f.width()) != 0) out.push_back(f.pixel(p));
  return out;
}

Vector masked_average(const FeatureMap& f, const BinaryMask& mask) {
  Vector sum = Vector::Zero(f.channels());
  double n = 0;
  for (const auto& v : masked_vectors(f, mask)) {
    sum += v;
    n += 1;
  }
  return sum / n;
}

// Convex-hull membership by Caratheodory subset enumeration: the point must be
// an (approximate) convex combination of some subset of at most C+1 points.
bool in_convex_hull(const Vector& p, const std::vector<Vector>& pts) {
  const int n = static_cast<int>(pts.size());
  const int dim = static_cast<int>(p.size());
  const int max_size = std::min(n, dim + 1);
  std::vector<int> subset;

  const auto try_subset = [&]() {
    const int k = static_cast<int>(subset.size());
    Eigen::MatrixXd a(dim + 1, k);
    for (int i = 0; i < k; ++i) {
      a.col(i).head(dim) = pts[static_cast<std::size_t>(subset[static_cast<std::size_t>(i)])];
      a(dim, i) = 1.0;
    }
    Eigen::VectorXd rhs(dim + 1);
    rhs.head(dim) = p;
    rhs(dim) = 1.0;
    const Eigen::VectorXd w = a.colPivHouseholderQr().solve(rhs);
    if ((a * w - rhs).norm() > 1e-7) return false;
    return (w.array() >= -1e-8).all();
  };

  // Depth-first enumeration of all subsets up to max_size.
  const std::function<bool(int, int)> rec = [&](int start, int remaining) {
    if (!subset.empty() && try_subset()) return true;
    if (remaining == 0) return false;
    for (int i = start; i < n; ++i) {
      subset.push_back(i);
      if (rec(i + 1, remaining - 1)) return true;
      subset.pop_back();
    }
    return false;
  };
  return rec(0, max_size);
}

}  // namespace

TEST_CASE("masked_kmeans basics") {
  SUBCASE("identical foreground vectors collapse every prototype") {
    std::vector<double> flat(2 * 9, 0.0);
    for (Index p = 0; p < 9; ++p) {
      flat[p] = 1.5;
      flat[9 + p] = -0.5;
    }
    const FeatureMap f = make_features(2, 3, 3, flat);
    const BinaryMask mask = make_mask(3, 3, {1, 1, 0, 1, 1, 0, 1, 1, 0});
    for (int k : {1, 2, 3}) {
      const KMeansResult res = masked_kmeans(f, mask, k, 17);
      for (const auto& proto : res.prototypes) {
        CHECK(proto.vector(0) == doctest::Approx(1.5));
        CHECK(proto.vector(1) == doctest::Approx(-0.5));
      }
    }
  }

  SUBCASE("1-d two-cluster fixed point") {
    const FeatureMap f = make_features(1, 2, 2, {0.0, 1.0, 10.0, 11.0});
    const BinaryMask mask = make_mask(2, 2, {1, 1, 1, 1});
    const KMeansResult res = masked_kmeans(f, mask, 2, 0);

    std::vector<double> centers{res.prototypes[0].vector(0), res.prototypes[1].vector(0)};
    std::sort(centers.begin(), centers.end());
    CHECK(centers[0] == doctest::Approx(0.5));
    CHECK(centers[1] == doctest::Approx(10.5));
    CHECK(res.assignment.objective == doctest::Approx(1.0));

    // Exhaustive oracle over all 2-partitions: the returned objective is the
    // global optimum.
    const std::vector<double> xs{0.0, 1.0, 10.0, 11.0};
    double best = std::numeric_limits<double>::infinity();
    for (int bits = 1; bits < 15; ++bits) {  // skip the two empty-side splits
      double s0 = 0, s1 = 0, n0 = 0, n1 = 0;
      for (int i = 0; i < 4; ++i) (bits >> i & 1 ? s1 : s0) += xs[i],
          (bits >> i & 1 ? n1 : n0) += 1;
      double obj = 0;
      for (int i = 0; i < 4; ++i) {
        const double mean = (bits >> i & 1) ? s1 / n1 : s0 / n0;
        obj += (xs[i] - mean) * (xs[i] - mean);
      }
      best = std::min(best, obj);
    }
    CHECK(res.assignment.objective == doctest::Approx(best));
  }

  SUBCASE("k=1 is masked average pooling") {
    std::mt19937_64 rng(21);
    const FeatureMap f = random_features(4, 5, 5, rng);
    const BinaryMask mask = random_mask(5, 5, rng);
    const KMeansResult res = masked_kmeans(f, mask, 1, 0);
    CHECK((res.prototypes[0].vector - masked_average(f, mask)).norm() <= 1e-9);
  }

  SUBCASE("fewer points than clusters yields singletons") {
    std::mt19937_64 rng(22);
    const FeatureMap f = random_features(3, 4, 4, rng);
    const BinaryMask mask = make_mask(4, 4, {0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0});
    const KMeansResult res = masked_kmeans(f, mask, 5, 0);
    CHECK(res.prototypes.size() == 2);
    CHECK(res.assignment.objective == 0.0);
    CHECK(res.prototypes[0].vector == f.pixel(1, 1));
    CHECK(res.prototypes[1].vector == f.pixel(3, 2));
  }

  SUBCASE("errors") {
    std::mt19937_64 rng(23);
    const FeatureMap f = random_features(3, 4, 4, rng);
    CHECK_THROWS_AS(masked_kmeans(f, BinaryMask::zeros(4, 4), 2, 0), EmptyForegroundError);
    CHECK_THROWS_AS(masked_kmeans(f, BinaryMask::zeros(3, 4), 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(masked_kmeans(f, random_mask(4, 4, rng), 0, 0), std::invalid_argument);
  }
}

TEST_CASE("masked_kmeans properties") {
  std::mt19937_64 rng(31);

  SUBCASE("objective trace is non-increasing") {
    for (int t = 0; t < 100; ++t) {
      const Index h = 3 + static_cast<Index>(rng() % 4);
      const Index w = 3 + static_cast<Index>(rng() % 4);
      const FeatureMap f = random_features(2 + static_cast<Index>(rng() % 3), h, w, rng);
      const BinaryMask mask = random_mask(h, w, rng);
      std::vector<double> trace;
      masked_kmeans(f, mask, 1 + static_cast<int>(rng() % 5), rng(), &trace);
      REQUIRE(!trace.empty());
      for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
  }

  SUBCASE("deterministic and background-independent") {
    for (int t = 0; t < 20; ++t) {
      const FeatureMap f = random_features(3, 5, 5, rng);
      const BinaryMask mask = random_mask(5, 5, rng);
      const std::uint64_t seed = rng();
      const KMeansResult a = masked_kmeans(f, mask, 3, seed);
      const KMeansResult b = masked_kmeans(f, mask, 3, seed);
      REQUIRE(a.prototypes.size() == b.prototypes.size());
      for (Index i = 0; i < a.prototypes.size(); ++i)
        CHECK(std::memcmp(a.prototypes[i].vector.data(), b.prototypes[i].vector.data(),
                          sizeof(double) * static_cast<std::size_t>(a.prototypes.channels())) == 0);
      CHECK(a.assignment.labels == b.assignment.labels);

      // Scramble background pixels; nothing may change.
      MatrixRX scrambled = f.channels_by_pixels();
      std::uniform_real_distribution<double> dist(-100.0, 100.0);
      for (Index p = 0; p < f.pixel_count(); ++p)
        if (mask.values()(p / 5, p % 5) == 0)
          for (Index ch = 0; ch < 3; ++ch) scrambled(ch, p) = dist(rng);
      const KMeansResult c2 = masked_kmeans(FeatureMap(5, 5, scrambled), mask, 3, seed);
      for (Index i = 0; i < a.prototypes.size(); ++i)
        CHECK(std::memcmp(a.prototypes[i].vector.data(), c2.prototypes[i].vector.data(),
                          sizeof(double) * static_cast<std::size_t>(a.prototypes.channels())) == 0);
    }
  }

  SUBCASE("every cluster stays populated") {
    for (int t = 0; t < 50; ++t) {
      const FeatureMap f = random_features(2, 4, 4, rng);
      const BinaryMask mask = random_mask(4, 4, rng, 0.8);
      const int k = 1 + static_cast<int>(rng() % 4);
      const KMeansResult res = masked_kmeans(f, mask, k, rng());
      std::vector<int> counts(static_cast<std::size_t>(res.prototypes.size()), 0);
      for (Index label : res.assignment.labels) {
        REQUIRE(label >= 0);
        REQUIRE(label < res.prototypes.size());
        counts[static_cast<std::size_t>(label)]++;
      }
      for (int count : counts) CHECK(count > 0);
    }
  }
}

TEST_CASE("superpixel_cluster basics") {
  std::mt19937_64 rng(41);

  SUBCASE("single superpixel reduces to masked average pooling") {
    const FeatureMap f = random_features(3, 6, 6, rng);
    // Small object: 3 of 36 pixels -> N_s = round(3 / (36/5)) = 0 -> clamped to 1.
    const BinaryMask mask =
        make_mask(6, 6, {0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0,
                         0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    for (int iters : {0, 1, 7}) {
      const PrototypeSet protos = superpixel_cluster(f, mask, 5, iters, 1.0);
      REQUIRE(protos.size() == 1);
      if (iters > 0) CHECK((protos[0].vector - masked_average(f, mask)).norm() <= 1e-9);
    }
  }

  SUBCASE("constant foreground features give constant prototypes") {
    std::vector<double> flat(2 * 16, 0.0);
    std::vector<int> maskv(16, 1);
    for (Index p = 0; p < 16; ++p) {
      flat[p] = 0.75;
      flat[16 + p] = -2.0;
    }
    const FeatureMap f = make_features(2, 4, 4, flat);
    const PrototypeSet protos = superpixel_cluster(f, make_mask(4, 4, maskv), 3, 5, 1.0);
    for (const auto& proto : protos) {
      CHECK(proto.vector(0) == doctest::Approx(0.75));
      CHECK(proto.vector(1) == doctest::Approx(-2.0));
    }
  }

  SUBCASE("full-image mask saturates the superpixel count") {
    const FeatureMap f = random_features(3, 10, 10, rng);
    MaskMatrix all = MaskMatrix::Constant(10, 10, 1);
    const PrototypeSet protos = superpixel_cluster(f, BinaryMask(all), 5, 5, 1.0);
    CHECK(protos.size() == 5);
    for (const auto& proto : protos) CHECK(proto.source == PrototypeSource::Superpixel);
  }

  SUBCASE("deterministic rerun") {
    const FeatureMap f = random_features(3, 8, 8, rng);
    const BinaryMask mask = random_mask(8, 8, rng, 0.6);
    const PrototypeSet a = superpixel_cluster(f, mask, 5, 10, 1.0);
    const PrototypeSet b = superpixel_cluster(f, mask, 5, 10, 1.0);
    REQUIRE(a.size() == b.size());
    for (Index i = 0; i < a.size(); ++i)
      CHECK(std::memcmp(a[i].vector.data(), b[i].vector.data(),
                        sizeof(double) * static_cast<std::size_t>(a.channels())) == 0);
  }

  SUBCASE("empty mask") {
    const FeatureMap f = random_features(2, 4, 4, rng);
    CHECK_THROWS_AS(superpixel_cluster(f, BinaryMask::zeros(4, 4), 5, 5, 1.0),
                    EmptyForegroundError);
  }

  SUBCASE("association weights recover each prototype as a convex combination") {
    for (int t = 0; t < 20; ++t) {
      const FeatureMap f = random_features(3, 6, 6, rng);
      const BinaryMask mask = random_mask(6, 6, rng, 0.7);
      const SuperpixelDetail detail = superpixel_cluster_detail(f, mask, 5, 4, 1.0);
      if (detail.association.size() == 0) continue;
      for (Index r = 0; r < detail.prototypes.size(); ++r) {
        const double total = detail.association.row(r).sum();
        Vector recombined = Vector::Zero(3);
        for (Index j = 0; j < detail.association.cols(); ++j) {
          CHECK(detail.association(r, j) >= 0.0);
          recombined +=
              detail.association(r, j) * f.pixel(detail.foreground[static_cast<std::size_t>(j)]);
        }
        recombined /= total;
        CHECK((recombined - detail.prototypes[r].vector).norm() <= 1e-9);
      }
    }
  }
}

TEST_CASE("prototypes stay in the convex hull of the masked features") {
  std::mt19937_64 rng(51);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const FeatureMap f = random_features(3, 4, 4, rng);
    const BinaryMask mask = random_mask(4, 4, rng, 0.3);
    const auto pts = masked_vectors(f, mask);
    if (pts.size() > 8) continue;
    ++checked;

    const KMeansResult km = masked_kmeans(f, mask, 3, rng());
    for (const auto& proto : km.prototypes) CHECK(in_convex_hull(proto.vector, pts));

    const PrototypeSet sp = superpixel_cluster(f, mask, 5, 4, 1.0);
    for (const auto& proto : sp) CHECK(in_convex_hull(proto.vector, pts));
  }
  CHECK(checked >= 20);
}

TEST_CASE("k=1 and N_s=1 agree with each other") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap f = random_features(4, 6, 6, rng);
    // Keep the object small so the superpixel count clamps to one.
    MaskMatrix m = MaskMatrix::Zero(6, 6);
    m(1, 2) = m(1, 3) = m(2, 2) = 1;
    const BinaryMask mask(m);
    const Vector km = masked_kmeans(f, mask, 1, 0).prototypes[0].vector;
    const Vector sp = superpixel_cluster(f, mask, 5, 10, 1.0)[0].vector;
    CHECK((km - sp).norm() <= 1e-9);
  }
}

TEST_CASE("merge_prototypes") {
  std::mt19937_64 rng(71);
  const FeatureMap f = random_features(3, 6, 6, rng);
  const BinaryMask mask = random_mask(6, 6, rng, 0.9);
  const PrototypeSet kmc = masked_kmeans(f, mask, 5, 0).prototypes;
  const PrototypeSet sgc = superpixel_cluster(f, mask, 5, 5, 1.0);
  REQUIRE(kmc.size() == 5);

  const PrototypeSet merged = merge_prototypes(kmc, sgc);
  CHECK(merged.size() == kmc.size() + sgc.size());
  for (Index i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].index == static_cast<int>(i));
    const bool is_km = i < kmc.size();
    CHECK(merged[i].source == (is_km ? PrototypeSource::KMeans : PrototypeSource::Superpixel));
    const Vector& src = is_km ? kmc[i].vector : sgc[i - kmc.size()].vector;
    CHECK(std::memcmp(merged[i].vector.data(), src.data(), sizeof(double) * 3) == 0);
  }

  SUBCASE("merging a set with itself doubles it and retags the first half") {
    const PrototypeSet doubled = merge_prototypes(sgc, sgc);
    CHECK(doubled.size() == 2 * sgc.size());
    for (Index i = 0; i < sgc.size(); ++i) {
      CHECK(doubled[i].source == PrototypeSource::KMeans);
      CHECK(doubled[i + sgc.size()].source == PrototypeSource::Superpixel);
    }
  }

  SUBCASE("channel mismatch") {
    const FeatureMap f2 = random_features(4, 6, 6, rng);
    const PrototypeSet other = masked_kmeans(f2, mask, 2, 0).prototypes;
    CHECK_THROWS_AS(merge_prototypes(kmc, other), std::invalid_argument);
  }
}
