#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "binpack/errors.hpp"

namespace binpack {

/// Dense row-major array of doubles with a dynamic shape. The leading axis
/// is the batch dimension wherever layers are involved.
class TensorND {
 public:
  TensorND() = default;
  explicit TensorND(std::vector<int> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(count(shape_), fill) {}
  TensorND(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw ShapeMismatch("data length does not match shape");
    }
  }

  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  int dim(std::size_t axis) const { return shape_[axis]; }

  /// Reinterprets the buffer under a new shape of equal element count.
  TensorND reshaped(std::vector<int> shape) const {
    if (count(shape) != data_.size()) {
      throw ShapeMismatch("reshape changes element count");
    }
    return TensorND(std::move(shape), data_);
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  /// Raises NonFiniteValue naming the offending context on the first
  /// NaN/Inf; all numeric stages call this rather than propagating garbage.
  void require_finite(const char* context) const {
    for (double v : data_) {
      if (!std::isfinite(v)) {
        throw NonFiniteValue(std::string("non-finite value in ") + context);
      }
    }
  }

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeMismatch("negative dimension");
      n *= static_cast<std::size_t>(d);
    }
    return shape.empty() ? 0 : n;
  }

  friend bool operator==(const TensorND&, const TensorND&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace binpack
