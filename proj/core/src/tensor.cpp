#include "actgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actgraph::num {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), values_(static_cast<std::size_t>(shape_product(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_product(shape_) != static_cast<std::int64_t>(values_.size())) {
    throw std::invalid_argument("tensor value count does not match shape");
  }
}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) throw std::invalid_argument("empty tensor literal");
  const int c = static_cast<int>(rows.begin()->size());
  shape_ = {r, c};
  values_.reserve(static_cast<std::size_t>(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw std::invalid_argument("ragged tensor literal");
    }
    values_.insert(values_.end(), row.begin(), row.end());
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({n, 1}, std::move(values));
}

Tensor Tensor::zeros(int rows, int cols) { return Tensor({rows, cols}); }

Tensor Tensor::filled(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.values_.begin(), t.values_.end(), value);
  return t;
}

Tensor Tensor::identity(int n) {
  Tensor t({n, n});
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

int Tensor::rows() const {
  if (ndim() != 2) throw std::logic_error("rows() requires a rank-2 tensor");
  return shape_[0];
}

int Tensor::cols() const {
  if (ndim() != 2) throw std::logic_error("cols() requires a rank-2 tensor");
  return shape_[1];
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Tensor::scalar_value() const {
  if (size() != 1) throw std::logic_error("scalar_value() on non-scalar tensor");
  return values_[0];
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch in max_abs_diff");
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.at(static_cast<int>(i)) - b.at(static_cast<int>(i))));
  }
  return worst;
}

}  // namespace actgraph::num
