#include "dre/autodiff/parameters.hpp"

#include <algorithm>
#include <cmath>

namespace dre::ad {

template <typename Real>
std::size_t ParameterSet<Real>::add(std::string name, Tensor<Real> value) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  value.set_requires_grad(true);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return tensors_.size() - 1;
}

template <typename Real>
std::optional<std::size_t> ParameterSet<Real>::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

template <typename Real>
std::size_t ParameterSet<Real>::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

template <typename Real>
std::size_t ParameterSet<Real>::total_values() const {
  std::size_t total = 0;
  for (const auto& t : tensors_) total += t.size();
  return total;
}

template <typename Real>
void ParameterSet<Real>::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

template <typename Real>
GradientSet<Real>::GradientSet(const ParameterSet<Real>& params) {
  buffers_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    buffers_.emplace_back(params[i].size(), Real{0});
  }
}

template <typename Real>
void GradientSet<Real>::zero() {
  for (auto& b : buffers_) std::fill(b.begin(), b.end(), Real{0});
}

template <typename Real>
void GradientSet<Real>::add(const GradientSet& other) {
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    auto& dst = buffers_[i];
    const auto& src = other.buffers_[i];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

template <typename Real>
void GradientSet<Real>::scale(Real factor) {
  for (auto& b : buffers_) {
    for (auto& v : b) v *= factor;
  }
}

template <typename Real>
Real GradientSet<Real>::global_norm() const {
  double sum = 0.0;
  for (const auto& b : buffers_) {
    for (auto v : b) sum += static_cast<double>(v) * static_cast<double>(v);
  }
  return static_cast<Real>(std::sqrt(sum));
}

template <typename Real>
void GradientSet<Real>::add_to(ParameterSet<Real>& params) const {
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    auto grad = params[i].grad();
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += buffers_[i][j];
  }
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class GradientSet<float>;
template class GradientSet<double>;

}  // namespace dre::ad
