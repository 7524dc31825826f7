#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "dre/autodiff/graph.hpp"

// Token attention and pooling.
//
// Every token row is the concatenation of its embedding and all encoder
// layer outputs. A shared vector w_a scores each row, e_t = tanh(row_t . w_a),
// and a masked softmax over positions turns scores into weights a_t. The
// attention output keeps one row per token, R_t = a_t * row_t, so the
// single text vector v = sum_t R_t is recoverable while pooling still sees
// a sequence. Pooling concatenates the column-wise max and mean of R over
// real positions; the mean divides by the true length.
namespace dre::attn {

inline constexpr std::string_view kAttentionWeightName = "attn.w_a";

// k + 2H * num_layers.
std::size_t attention_width(std::size_t k, std::size_t hidden_size, std::size_t num_layers);

// w_a ~ uniform(-1/sqrt(d), 1/sqrt(d)).
template <typename Real>
void add_attention_parameters(ad::ParameterSet<Real>& params, std::size_t width, ad::Rng& rng);

// Row t = [emb_t; H1_t; ...; HL_t].
template <typename Real>
ad::Var assemble_attention_input(ad::Graph<Real>& graph, ad::Var embeddings,
                                 std::span<const ad::Var> layer_outputs);

// T x 1 column of weights; zero at masked positions, summing to one.
// Throws ShapeError when every position is masked.
template <typename Real>
ad::Var attention_weights(ad::Graph<Real>& graph, ad::Var rows, ad::Var w_a,
                          std::span<const std::uint8_t> mask);

// R_t = a_t * rows_t.
template <typename Real>
ad::Var apply_attention(ad::Graph<Real>& graph, ad::Var rows, ad::Var weights);

// 1 x 2d vector [max over real rows; mean over real rows].
template <typename Real>
ad::Var pool(ad::Graph<Real>& graph, ad::Var weighted, std::span<const std::uint8_t> mask);

}  // namespace dre::attn
