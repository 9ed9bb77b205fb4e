#include "protoseg/ops.hpp"

namespace protoseg {

ScalarMap adaptive_avg_pool(const ScalarMap& map, Index out_h, Index out_w) {
  return ScalarMap(adaptive_avg_pool(map.values(), out_h, out_w));
}

FeatureMap adaptive_avg_pool(const FeatureMap& map, Index out_h, Index out_w) {
  MatrixRX out(map.channels(), out_h * out_w);
  for (Index c = 0; c < map.channels(); ++c) {
    const MatrixRX pooled = adaptive_avg_pool(map.channel(c), out_h, out_w);
    out.row(c) = Eigen::Map<const Eigen::RowVectorXd>(pooled.data(), pooled.size());
  }
  return FeatureMap(out_h, out_w, std::move(out));
}

ScalarMap bilinear_resize(const ScalarMap& map, Index out_h, Index out_w) {
  return ScalarMap(bilinear_resize(map.values(), out_h, out_w));
}

FeatureMap bilinear_resize(const FeatureMap& map, Index out_h, Index out_w) {
  MatrixRX out(map.channels(), out_h * out_w);
  for (Index c = 0; c < map.channels(); ++c) {
    const MatrixRX resized = bilinear_resize(map.channel(c), out_h, out_w);
    out.row(c) = Eigen::Map<const Eigen::RowVectorXd>(resized.data(), resized.size());
  }
  return FeatureMap(out_h, out_w, std::move(out));
}

std::pair<ScalarMap, ScalarMap> softmax2(const ScalarMap& fg, const ScalarMap& bg) {
  detail::require(fg.height() == bg.height() && fg.width() == bg.width(),
                  "softmax2: dimension mismatch");
  const ArrayRX f = fg.values().array();
  const ArrayRX b = bg.values().array();
  const ArrayRX m = f.max(b);
  const ArrayRX ef = (f - m).exp();
  const ArrayRX eb = (b - m).exp();
  const ArrayRX sum = ef + eb;
  return {ScalarMap((ef / sum).matrix()), ScalarMap((eb / sum).matrix())};
}

ScalarMap minmax_normalize(const ScalarMap& map) {
  const double lo = map.values().minCoeff();
  const double hi = map.values().maxCoeff();
  return ScalarMap(((map.values().array() - lo) / (hi - lo + kDenomEps)).matrix());
}

ScalarMap affine_pm1(const ScalarMap& map, double alpha, double beta) {
  return ScalarMap((alpha * map.values().array() - beta).matrix());
}

}  // namespace protoseg
