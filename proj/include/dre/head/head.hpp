#pragma once

#include <cstddef>
#include <string_view>

#include "dre/autodiff/graph.hpp"

// Two-layer classifier: y_o = tanh(X W1 + b1), probs = softmax(y_o W_o + b_o).
namespace dre::head {

inline constexpr std::string_view kHiddenWeightName = "head.w1";
inline constexpr std::string_view kHiddenBiasName = "head.b1";
inline constexpr std::string_view kOutputWeightName = "head.w_o";
inline constexpr std::string_view kOutputBiasName = "head.b_o";

struct HeadConfig {
  std::size_t input_width = 0;
  std::size_t hidden = 256;
  std::size_t classes = 2;
};

void validate(const HeadConfig& config);
std::size_t head_param_count(const HeadConfig& config);

// Weights uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
template <typename Real>
void add_head_parameters(ad::ParameterSet<Real>& params, const HeadConfig& config, ad::Rng& rng);

// Output-layer logits (1 x n) for a pooled 1 x input_width vector.
template <typename Real>
ad::Var logits(ad::Graph<Real>& graph, ad::Var pooled);

template <typename Real>
ad::Var predict(ad::Graph<Real>& graph, ad::Var logits);

// Cross-entropy of softmax(logits) against label, via the fused op.
// Throws ConfigError for an out-of-range label.
template <typename Real>
ad::Var loss(ad::Graph<Real>& graph, ad::Var logits, std::size_t label);

}  // namespace dre::head
