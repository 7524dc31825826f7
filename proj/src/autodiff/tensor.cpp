#include "dre/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace dre::ad {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

template <typename Real>
Tensor<Real>::Tensor(Shape shape, bool requires_grad)
    : shape_(std::move(shape)), data_(numel(shape_), Real{0}) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape_));
  }
  set_requires_grad(requires_grad);
}

template <typename Real>
Tensor<Real>::Tensor(Shape shape, std::vector<Real> data, bool requires_grad)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape_));
  }
  if (numel(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + to_string(shape_) + " holds " +
                     std::to_string(numel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
  set_requires_grad(requires_grad);
}

template <typename Real>
std::size_t Tensor<Real>::rows() const {
  if (shape_.size() <= 1) return 1;
  return numel(shape_) / shape_.back();
}

template <typename Real>
std::size_t Tensor<Real>::cols() const {
  return shape_.empty() ? 1 : shape_.back();
}

template <typename Real>
void Tensor<Real>::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on) {
    grad_.assign(data_.size(), Real{0});
  } else {
    grad_.clear();
    grad_.shrink_to_fit();
  }
}

template <typename Real>
void Tensor<Real>::zero_grad() {
  std::fill(grad_.begin(), grad_.end(), Real{0});
}

template <typename Real>
Tensor<Real> Tensor<Real>::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_, false);
}

template <typename Real>
bool Tensor<Real>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace dre::ad
