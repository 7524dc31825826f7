#pragma once

#include <cstddef>
#include <string_view>

#include "dre/autodiff/graph.hpp"
#include "dre/embedding/sequence.hpp"

namespace dre::emb {

enum class EmbeddingMode { lookup, contextual };

std::string_view to_string(EmbeddingMode mode);
// Accepts "lookup" or "contextual".
EmbeddingMode parse_embedding_mode(std::string_view text);

inline constexpr std::size_t kSegmentCount = 2;
inline constexpr double kEmbeddingInitRange = 0.05;

inline constexpr std::string_view kTokenTableName = "emb.tokens";
inline constexpr std::string_view kSegmentTableName = "emb.segments";

// Trainable |V| x k token table and 2 x k segment table, both drawn from
// uniform(-0.05, 0.05).
template <typename Real>
void add_lookup_parameters(ad::ParameterSet<Real>& params, std::size_t vocab_size,
                           std::size_t dimension, ad::Rng& rng);

// Row t = tokens[id_t] + segments[seg_t]; rows past true_length are zero.
template <typename Real>
ad::Var embed_lookup(ad::Graph<Real>& graph, const TokenSequence& seq);

// Stored T x k matrix as a constant, zero-padded to seq.length() rows.
template <typename Real>
ad::Var embed_contextual(ad::Graph<Real>& graph, const ad::Tensor<float>& matrix,
                         const TokenSequence& seq);

}  // namespace dre::emb
