#include "dre/attention/attention.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace dre::attn {

std::size_t attention_width(std::size_t k, std::size_t hidden_size, std::size_t num_layers) {
  return k + 2 * hidden_size * num_layers;
}

template <typename Real>
void add_attention_parameters(ad::ParameterSet<Real>& params, std::size_t width, ad::Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ad::Tensor<Real> w(ad::Shape{width});
  for (auto& v : w.data()) v = static_cast<Real>(dist(rng));
  params.add(std::string(kAttentionWeightName), std::move(w));
}

template <typename Real>
ad::Var assemble_attention_input(ad::Graph<Real>& graph, ad::Var embeddings,
                                 std::span<const ad::Var> layer_outputs) {
  std::vector<ad::Var> parts{embeddings};
  parts.insert(parts.end(), layer_outputs.begin(), layer_outputs.end());
  return graph.concat(parts);
}

template <typename Real>
ad::Var attention_weights(ad::Graph<Real>& graph, ad::Var rows, ad::Var w_a,
                          std::span<const std::uint8_t> mask) {
  const std::size_t width = graph.value(rows).cols();
  ad::Var column = w_a;
  if (graph.value(w_a).rank() == 1) column = graph.reshape(w_a, ad::Shape{width, 1});
  const ad::Var scores = graph.tanh(graph.matmul(rows, column));
  return graph.masked_softmax(scores, mask);
}

template <typename Real>
ad::Var apply_attention(ad::Graph<Real>& graph, ad::Var rows, ad::Var weights) {
  return graph.mul(rows, weights);
}

template <typename Real>
ad::Var pool(ad::Graph<Real>& graph, ad::Var weighted, std::span<const std::uint8_t> mask) {
  const ad::Var parts[] = {graph.masked_max(weighted, mask), graph.masked_mean(weighted, mask)};
  return graph.concat(parts);
}

#define DRE_INSTANTIATE_ATTENTION(Real)                                                      \
  template void add_attention_parameters<Real>(ad::ParameterSet<Real>&, std::size_t,         \
                                               ad::Rng&);                                   \
  template ad::Var assemble_attention_input<Real>(ad::Graph<Real>&, ad::Var,                 \
                                                  std::span<const ad::Var>);                \
  template ad::Var attention_weights<Real>(ad::Graph<Real>&, ad::Var, ad::Var,               \
                                           std::span<const std::uint8_t>);                  \
  template ad::Var apply_attention<Real>(ad::Graph<Real>&, ad::Var, ad::Var);                \
  template ad::Var pool<Real>(ad::Graph<Real>&, ad::Var, std::span<const std::uint8_t>);

DRE_INSTANTIATE_ATTENTION(float)
DRE_INSTANTIATE_ATTENTION(double)

#undef DRE_INSTANTIATE_ATTENTION

}  // namespace dre::attn
