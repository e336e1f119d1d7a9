#include "polarfront/tensor.hpp"

#include <cmath>
#include <sstream>

namespace polarfront {

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

std::size_t Tensor::offset(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank()) {
    throw IndexError("index rank " + std::to_string(idx.size()) + " vs tensor rank " +
                     std::to_string(rank()));
  }
  std::size_t off = 0;
  int axis = 0;
  for (int i : idx) {
    if (i < 0 || i >= shape_[static_cast<std::size_t>(axis)]) {
      throw IndexError("index " + std::to_string(i) + " out of range for axis " +
                       std::to_string(axis) + " of shape " + shape_str());
    }
    off = off * static_cast<std::size_t>(shape_[static_cast<std::size_t>(axis)]) +
          static_cast<std::size_t>(i);
    ++axis;
  }
  return off;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void Tensor::add_(const Tensor& other) {
  require_same_shape(*this, other, "Tensor::add_");
  const double* src = other.data();
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += src[i];
}

void Tensor::scale_(double s) {
  for (double& v : data_) v *= s;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

}  // namespace polarfront
