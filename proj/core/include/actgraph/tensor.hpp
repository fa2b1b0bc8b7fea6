#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace actgraph::num {

/// Dense row-major tensor of 64-bit floats. Rank 1 and 2 cover every op
/// in this codebase; scalars are shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);  // zero-filled
  Tensor(std::vector<int> shape, std::vector<double> values);
  Tensor(std::initializer_list<std::initializer_list<double>> rows);  // 2-D literal

  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);     // shape {1, n}
  static Tensor column(std::vector<double> values);  // shape {n, 1}
  static Tensor zeros(int rows, int cols);
  static Tensor filled(std::vector<int> shape, double value);
  static Tensor identity(int n);

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  bool is_scalar() const { return size() == 1; }

  int rows() const;  // rank-2 only
  int cols() const;

  double& at(int i) { return values_[static_cast<std::size_t>(i)]; }
  double at(int i) const { return values_[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * cols() + j]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  double scalar_value() const;  // asserts size() == 1

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

/// Max over |a - b| elementwise; tensors must share a shape.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace actgraph::num
