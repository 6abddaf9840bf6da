#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgv {

// Dense 2-D tensor of doubles, row-major. Vectors are [n,1] columns and
// scalars are [1,1]. `node` is the handle into the active Tape (-1 when the
// tensor is a constant from autodiff's point of view).
class Tensor {
 public:
  Tensor() = default;

  Tensor(int rows, int cols) : rows_(rows), cols_(cols), v_(check_extents(rows, cols), 0.0) {}

  Tensor(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (static_cast<size_t>(check_extents(rows, cols)) != v_.size())
      throw std::invalid_argument("Tensor: shape " + shape_str() + " does not match " +
                                  std::to_string(v_.size()) + " values");
  }

  static Tensor scalar(double x) { return Tensor(1, 1, {x}); }

  static Tensor full(int rows, int cols, double x) {
    Tensor t(rows, cols);
    std::fill(t.v_.begin(), t.v_.end(), x);
    return t;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  double value() const {
    if (!is_scalar()) throw std::invalid_argument("Tensor::value: not a scalar, shape " + shape_str());
    return v_[0];
  }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double& at(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }

  std::string shape_str() const {
    return "[" + std::to_string(rows_) + "," + std::to_string(cols_) + "]";
  }

  // Handle into the recording tape; managed by the ops layer.
  int node = -1;

 private:
  static int check_extents(int rows, int cols) {
    if (rows <= 0 || cols <= 0)
      throw std::invalid_argument("Tensor: extents must be positive, got [" +
                                  std::to_string(rows) + "," + std::to_string(cols) + "]");
    return rows * cols;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

inline constexpr double kDenomGuard = 1e-12;

}  // namespace mgv
