#include "pat/diff/tensor.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::diff {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) {
      throw ShapeError(fmt::format("negative dimension in shape {}", shape_str(shape)));
    }
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError(fmt::format("tensor: shape {} holds {} values, got {}", shape_str(shape_),
                                 shape_numel(shape_), data_.size()));
  }
}

Tensor Tensor::from(std::initializer_list<double> values) {
  return Tensor({static_cast<int>(values.size())}, std::vector<double>(values));
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw ShapeError(fmt::format("tensor: axis {} out of range for shape {}", axis, shape_str(shape_)));
  }
  return shape_[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError(fmt::format("item: expected one element, shape is {}", shape_str(shape_)));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError(fmt::format("reshape: {} values do not fit shape {}", data_.size(), shape_str(shape)));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ShapeError(fmt::format("accumulate: shape {} vs {}", shape_str(shape_), shape_str(other.shape_)));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

}  // namespace pat::diff
