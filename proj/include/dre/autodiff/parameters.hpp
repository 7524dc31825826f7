#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dre/autodiff/tensor.hpp"

namespace dre::ad {

// Ordered, named collection of trainable tensors. Insertion order is the
// canonical order for checkpoints, initialization and optimizer state.
template <typename Real>
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor<Real> value);

  std::size_t size() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor<Real>& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor<Real>& operator[](std::size_t i) const { return tensors_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws ConfigError when the name is absent.
  std::size_t index_of(std::string_view name) const;
  Tensor<Real>& at(std::string_view name) { return tensors_[index_of(name)]; }
  const Tensor<Real>& at(std::string_view name) const { return tensors_[index_of(name)]; }

  // Total number of scalar values across all tensors.
  std::size_t total_values() const;
  void zero_grad();

 private:
  std::vector<std::string> names_;
  std::vector<Tensor<Real>> tensors_;
};

// Gradient buffers aligned one-to-one with a ParameterSet. Used as a
// per-shard accumulator when examples are processed in parallel.
template <typename Real>
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet<Real>& params);

  std::size_t size() const { return buffers_.size(); }
  std::span<Real> operator[](std::size_t i) { return buffers_[i]; }
  std::span<const Real> operator[](std::size_t i) const { return buffers_[i]; }

  void zero();
  void add(const GradientSet& other);
  void scale(Real factor);
  Real global_norm() const;
  // Adds every buffer into the matching parameter's grad.
  void add_to(ParameterSet<Real>& params) const;

 private:
  std::vector<std::vector<Real>> buffers_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class GradientSet<float>;
extern template class GradientSet<double>;

}  // namespace dre::ad
