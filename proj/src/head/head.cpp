#include "dre/head/head.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dre::head {

void validate(const HeadConfig& config) {
  if (config.classes < 2) throw ConfigError("classifier needs at least two classes");
  if (config.hidden < 1) throw ConfigError("classifier hidden width must be positive");
  if (config.input_width < 1) throw ConfigError("classifier input width must be positive");
}

std::size_t head_param_count(const HeadConfig& config) {
  return config.input_width * config.hidden + config.hidden + config.hidden * config.classes +
         config.classes;
}

template <typename Real>
void add_head_parameters(ad::ParameterSet<Real>& params, const HeadConfig& config, ad::Rng& rng) {
  validate(config);
  auto uniform = [&](std::size_t rows, std::size_t cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    ad::Tensor<Real> t(ad::Shape{rows, cols});
    for (auto& v : t.data()) v = static_cast<Real>(dist(rng));
    return t;
  };
  params.add(std::string(kHiddenWeightName), uniform(config.input_width, config.hidden));
  params.add(std::string(kHiddenBiasName), ad::Tensor<Real>(ad::Shape{config.hidden}));
  params.add(std::string(kOutputWeightName), uniform(config.hidden, config.classes));
  params.add(std::string(kOutputBiasName), ad::Tensor<Real>(ad::Shape{config.classes}));
}

template <typename Real>
ad::Var logits(ad::Graph<Real>& graph, ad::Var pooled) {
  const ad::Var w1 = graph.parameter(kHiddenWeightName);
  const ad::Var b1 = graph.parameter(kHiddenBiasName);
  const ad::Var wo = graph.parameter(kOutputWeightName);
  const ad::Var bo = graph.parameter(kOutputBiasName);
  const ad::Var hidden = graph.tanh(graph.add_bias(graph.matmul(pooled, w1), b1));
  return graph.add_bias(graph.matmul(hidden, wo), bo);
}

template <typename Real>
ad::Var predict(ad::Graph<Real>& graph, ad::Var logits) {
  return graph.masked_softmax(logits, {});
}

template <typename Real>
ad::Var loss(ad::Graph<Real>& graph, ad::Var logits, std::size_t label) {
  return graph.softmax_cross_entropy(logits, label);
}

#define DRE_INSTANTIATE_HEAD(Real)                                                           \
  template void add_head_parameters<Real>(ad::ParameterSet<Real>&, const HeadConfig&,        \
                                          ad::Rng&);                                        \
  template ad::Var logits<Real>(ad::Graph<Real>&, ad::Var);                                  \
  template ad::Var predict<Real>(ad::Graph<Real>&, ad::Var);                                 \
  template ad::Var loss<Real>(ad::Graph<Real>&, ad::Var, std::size_t);

DRE_INSTANTIATE_HEAD(float)
DRE_INSTANTIATE_HEAD(double)

#undef DRE_INSTANTIATE_HEAD

}  // namespace dre::head
