#pragma once

#include <cstdint>
#include <vector>

#include "dre/autodiff/parameters.hpp"

namespace dre::ad {

struct AdamOptions {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter moment estimates, aligned with a ParameterSet.
template <typename Real>
struct AdamState {
  explicit AdamState(const ParameterSet<Real>& params, AdamOptions opts = {});

  AdamOptions options;
  std::uint64_t step_count = 0;
  std::vector<std::vector<Real>> first_moment;
  std::vector<std::vector<Real>> second_moment;
};

// Bias-corrected Adam update reading each parameter's grad buffer. Throws
// NumericError naming the parameter if any gradient is NaN or infinite;
// nothing is modified in that case.
template <typename Real>
void adam_step(ParameterSet<Real>& params, AdamState<Real>& state);

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace dre::ad
