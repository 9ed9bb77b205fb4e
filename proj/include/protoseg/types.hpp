#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace protoseg {

using Index = Eigen::Index;

// Row-major dense storage throughout, so the flat view of a matrix matches the
// row-major on-disk layout byte for byte.
using MatrixRX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ArrayRX = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Thrown when an operation that needs foreground pixels gets a mask without any.
struct EmptyForegroundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

}  // namespace detail

/// H×W map of finite reals. Immutable after construction.
class ScalarMap {
 public:
  ScalarMap() = default;
  explicit ScalarMap(MatrixRX values) : values_(std::move(values)) {
    detail::require(values_.rows() > 0 && values_.cols() > 0,
                    "ScalarMap: dimensions must be positive");
    detail::require(detail::all_finite(values_), "ScalarMap: non-finite value");
  }

  static ScalarMap constant(Index height, Index width, double value) {
    return ScalarMap(MatrixRX::Constant(height, width, value));
  }
  static ScalarMap zeros(Index height, Index width) {
    return ScalarMap(MatrixRX::Zero(height, width));
  }

  Index height() const { return values_.rows(); }
  Index width() const { return values_.cols(); }
  Index size() const { return values_.size(); }
  double operator()(Index y, Index x) const { return values_(y, x); }
  const MatrixRX& values() const { return values_; }

 private:
  MatrixRX values_;
};

/// H×W mask whose entries are exactly 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(MaskMatrix values) : values_(std::move(values)) {
    detail::require(values_.rows() > 0 && values_.cols() > 0,
                    "BinaryMask: dimensions must be positive");
    detail::require((values_.array() <= 1).all(), "BinaryMask: values must be 0 or 1");
  }

  static BinaryMask zeros(Index height, Index width) {
    return BinaryMask(MaskMatrix::Zero(height, width));
  }

  Index height() const { return values_.rows(); }
  Index width() const { return values_.cols(); }
  Index size() const { return values_.size(); }
  std::uint8_t operator()(Index y, Index x) const { return values_(y, x); }
  Index foreground_count() const { return (values_.array() != 0).count(); }
  const MaskMatrix& values() const { return values_; }

  bool operator==(const BinaryMask& other) const {
    return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
           (values_.array() == other.values_.array()).all();
  }

 private:
  MaskMatrix values_;
};

/// C×H×W feature tensor stored channels-by-pixels: column p holds the feature
/// vector of pixel p = y*W + x. The flat data of the row-major C×(H·W) matrix
/// is identical to the row-major C×H×W layout.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(Index height, Index width, MatrixRX channels_by_pixels)
      : height_(height), width_(width), features_(std::move(channels_by_pixels)) {
    detail::require(height_ > 0 && width_ > 0, "FeatureMap: dimensions must be positive");
    detail::require(features_.rows() > 0, "FeatureMap: channel count must be positive");
    detail::require(features_.cols() == height_ * width_,
                    "FeatureMap: pixel count does not match dimensions");
    detail::require(detail::all_finite(features_), "FeatureMap: non-finite value");
  }

  Index channels() const { return features_.rows(); }
  Index height() const { return height_; }
  Index width() const { return width_; }
  Index pixel_count() const { return features_.cols(); }

  auto pixel(Index p) const { return features_.col(p); }
  auto pixel(Index y, Index x) const { return features_.col(y * width_ + x); }
  const MatrixRX& channels_by_pixels() const { return features_; }

  /// Read-only H×W view of one channel plane (rows of a row-major matrix are
  /// contiguous, so this is a zero-copy map).
  Eigen::Map<const MatrixRX> channel(Index c) const {
    return Eigen::Map<const MatrixRX>(features_.data() + c * features_.cols(), height_, width_);
  }

 private:
  Index height_ = 0;
  Index width_ = 0;
  MatrixRX features_;
};

/// Rank-1..3 dense container with flat row-major storage; the unit of file I/O.
class Tensor {
 public:
  Tensor(std::vector<Index> dims, Vector data) : dims_(std::move(dims)), data_(std::move(data)) {
    detail::require(!dims_.empty() && dims_.size() <= 3, "Tensor: rank must be 1..3");
    Index count = 1;
    for (Index d : dims_) {
      detail::require(d > 0, "Tensor: dimensions must be positive");
      count *= d;
    }
    detail::require(count == data_.size(), "Tensor: data length does not match dimensions");
    detail::require(detail::all_finite(data_), "Tensor: non-finite value");
  }

  Index rank() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index i) const { return dims_.at(static_cast<std::size_t>(i)); }
  Index size() const { return data_.size(); }
  const Vector& data() const { return data_; }

  static Tensor from(const ScalarMap& map) {
    Vector flat = Eigen::Map<const Vector>(map.values().data(), map.size());
    return Tensor({map.height(), map.width()}, std::move(flat));
  }
  static Tensor from(const FeatureMap& map) {
    Vector flat =
        Eigen::Map<const Vector>(map.channels_by_pixels().data(), map.channels_by_pixels().size());
    return Tensor({map.channels(), map.height(), map.width()}, std::move(flat));
  }
  static Tensor from(const Vector& v) {
    detail::require(v.size() > 0, "Tensor: empty vector");
    return Tensor({v.size()}, v);
  }

  ScalarMap to_scalar_map() const {
    detail::require(rank() == 2, "Tensor: rank-2 expected for a scalar map");
    return ScalarMap(Eigen::Map<const MatrixRX>(data_.data(), dims_[0], dims_[1]));
  }
  FeatureMap to_feature_map() const {
    detail::require(rank() == 3, "Tensor: rank-3 expected for a feature map");
    return FeatureMap(dims_[1], dims_[2],
                      Eigen::Map<const MatrixRX>(data_.data(), dims_[0], dims_[1] * dims_[2]));
  }

 private:
  std::vector<Index> dims_;
  Vector data_;
};

}  // namespace protoseg
