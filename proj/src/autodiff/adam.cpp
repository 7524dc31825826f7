#include "dre/autodiff/adam.hpp"

#include <cmath>
#include <string>

namespace dre::ad {

template <typename Real>
AdamState<Real>::AdamState(const ParameterSet<Real>& params, AdamOptions opts) : options(opts) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment.emplace_back(params[i].size(), Real{0});
    second_moment.emplace_back(params[i].size(), Real{0});
  }
}

template <typename Real>
void adam_step(ParameterSet<Real>& params, AdamState<Real>& state) {
  if (params.size() != state.first_moment.size()) {
    throw ShapeError("adam: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != state.first_moment[i].size()) {
      throw ShapeError("adam: moment shape mismatch for parameter '" + params.name(i) + "'");
    }
    for (Real g : params[i].grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in parameter '" + params.name(i) + "'");
      }
    }
  }

  ++state.step_count;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  const Real b1 = static_cast<Real>(o.beta1);
  const Real b2 = static_cast<Real>(o.beta2);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].data();
    auto grad = params[i].grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const Real g = grad[j];
      m[j] = b1 * m[j] + (Real{1} - b1) * g;
      v[j] = b2 * v[j] + (Real{1} - b2) * g * g;
      const double m_hat = static_cast<double>(m[j]) / correction1;
      const double v_hat = static_cast<double>(v[j]) / correction2;
      value[j] -= static_cast<Real>(o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon));
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(ParameterSet<float>&, AdamState<float>&);
template void adam_step<double>(ParameterSet<double>&, AdamState<double>&);

}  // namespace dre::ad
