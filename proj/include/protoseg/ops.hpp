#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

/// Stabilizer added to the min-max and cosine denominators.
inline constexpr double kDenomEps = 1e-7;

/// Mean-pools `in` down to out_h×out_w. Output cell (i,j) averages the window
/// [floor(i*H/out_h), ceil((i+1)*H/out_h)) × [floor(j*W/out_w), ceil((j+1)*W/out_w));
/// the windows tile the input exactly.
template <class Derived>
MatrixRX adaptive_avg_pool(const Eigen::MatrixBase<Derived>& in, Index out_h, Index out_w) {
  const Index h = in.rows();
  const Index w = in.cols();
  detail::require(out_h > 0 && out_w > 0, "adaptive_avg_pool: target dims must be positive");
  detail::require(out_h <= h && out_w <= w, "adaptive_avg_pool: target dims exceed input");

  MatrixRX out(out_h, out_w);
  for (Index i = 0; i < out_h; ++i) {
    const Index r0 = (i * h) / out_h;
    const Index r1 = ((i + 1) * h + out_h - 1) / out_h;
    for (Index j = 0; j < out_w; ++j) {
      const Index c0 = (j * w) / out_w;
      const Index c1 = ((j + 1) * w + out_w - 1) / out_w;
      out(i, j) = in.block(r0, c0, r1 - r0, c1 - c0).mean();
    }
  }
  return out;
}

/// Resizes `in` to out_h×out_w by bilinear interpolation with half-pixel
/// centers: source coordinate (i+0.5)*H/out_h - 0.5, clamped to the borders.
/// Returns the input unchanged when the dimensions already match.
template <class Derived>
MatrixRX bilinear_resize(const Eigen::MatrixBase<Derived>& in, Index out_h, Index out_w) {
  const Index h = in.rows();
  const Index w = in.cols();
  detail::require(out_h > 0 && out_w > 0, "bilinear_resize: target dims must be positive");
  if (out_h == h && out_w == w) return in;

  const auto axis = [](Index in_n, Index out_n, std::vector<Index>& lo, std::vector<Index>& hi,
                       std::vector<double>& frac) {
    lo.resize(out_n);
    hi.resize(out_n);
    frac.resize(out_n);
    const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
    for (Index i = 0; i < out_n; ++i) {
      double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(in_n - 1));
      const Index i0 = static_cast<Index>(std::floor(s));
      lo[i] = i0;
      hi[i] = std::min(i0 + 1, in_n - 1);
      frac[i] = s - static_cast<double>(i0);
    }
  };

  std::vector<Index> y0, y1, x0, x1;
  std::vector<double> ty, tx;
  axis(h, out_h, y0, y1, ty);
  axis(w, out_w, x0, x1, tx);

  MatrixRX out(out_h, out_w);
  for (Index i = 0; i < out_h; ++i) {
    for (Index j = 0; j < out_w; ++j) {
      const double top = (1.0 - tx[j]) * in(y0[i], x0[j]) + tx[j] * in(y0[i], x1[j]);
      const double bottom = (1.0 - tx[j]) * in(y1[i], x0[j]) + tx[j] * in(y1[i], x1[j]);
      out(i, j) = (1.0 - ty[i]) * top + ty[i] * bottom;
    }
  }
  return out;
}

/// Cosine similarity a·b / (‖a‖‖b‖ + eps), clamped to [-1, 1].
/// A zero vector on either side yields 0.
template <class DerivedA, class DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::require(a.size() == b.size(), "cosine: length mismatch");
  const double denom = a.norm() * b.norm() + kDenomEps;
  return std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

ScalarMap adaptive_avg_pool(const ScalarMap& map, Index out_h, Index out_w);
FeatureMap adaptive_avg_pool(const FeatureMap& map, Index out_h, Index out_w);

ScalarMap bilinear_resize(const ScalarMap& map, Index out_h, Index out_w);
FeatureMap bilinear_resize(const FeatureMap& map, Index out_h, Index out_w);

/// Per-pixel two-channel softmax, stabilized by subtracting the per-pixel max.
std::pair<ScalarMap, ScalarMap> softmax2(const ScalarMap& fg, const ScalarMap& bg);

/// (x - min) / (max - min + eps) with min/max over the whole map.
/// A constant map normalizes to all zeros.
ScalarMap minmax_normalize(const ScalarMap& map);

/// alpha*x - beta elementwise.
ScalarMap affine_pm1(const ScalarMap& map, double alpha, double beta);

}  // namespace protoseg
