#include "dre/embedding/embedding.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace dre::emb {

std::string_view to_string(EmbeddingMode mode) {
  return mode == EmbeddingMode::lookup ? "lookup" : "contextual";
}

EmbeddingMode parse_embedding_mode(std::string_view text) {
  if (text == "lookup") return EmbeddingMode::lookup;
  if (text == "contextual") return EmbeddingMode::contextual;
  throw ConfigError("unknown embedding mode '" + std::string(text) +
                    "' (expected lookup or contextual)");
}

template <typename Real>
void add_lookup_parameters(ad::ParameterSet<Real>& params, std::size_t vocab_size,
                           std::size_t dimension, ad::Rng& rng) {
  std::uniform_real_distribution<double> dist(-kEmbeddingInitRange, kEmbeddingInitRange);
  auto table = [&](std::size_t rows) {
    ad::Tensor<Real> t(ad::Shape{rows, dimension});
    for (auto& v : t.data()) v = static_cast<Real>(dist(rng));
    return t;
  };
  params.add(std::string(kTokenTableName), table(vocab_size));
  params.add(std::string(kSegmentTableName), table(kSegmentCount));
}

template <typename Real>
ad::Var embed_lookup(ad::Graph<Real>& graph, const TokenSequence& seq) {
  const ad::Var tokens = graph.parameter(kTokenTableName);
  const ad::Var segments = graph.parameter(kSegmentTableName);
  const ad::Var tok = graph.gather_rows(tokens, seq.token_ids, seq.mask);
  const ad::Var seg = graph.gather_rows(segments, seq.segment_ids, seq.mask);
  return graph.add(tok, seg);
}

template <typename Real>
ad::Var embed_contextual(ad::Graph<Real>& graph, const ad::Tensor<float>& matrix,
                         const TokenSequence& seq) {
  if (matrix.rows() != seq.true_length || seq.length() < matrix.rows()) {
    throw ShapeError("contextual matrix has " + std::to_string(matrix.rows()) +
                     " rows but the sequence has " + std::to_string(seq.true_length) +
                     " real positions");
  }
  const std::size_t k = matrix.cols();
  ad::Tensor<Real> padded(ad::Shape{seq.length(), k});
  std::copy(matrix.data().begin(), matrix.data().end(), padded.data().begin());
  return graph.input(std::move(padded));
}

template void add_lookup_parameters<float>(ad::ParameterSet<float>&, std::size_t, std::size_t,
                                           ad::Rng&);
template void add_lookup_parameters<double>(ad::ParameterSet<double>&, std::size_t, std::size_t,
                                            ad::Rng&);
template ad::Var embed_lookup<float>(ad::Graph<float>&, const TokenSequence&);
template ad::Var embed_lookup<double>(ad::Graph<double>&, const TokenSequence&);
template ad::Var embed_contextual<float>(ad::Graph<float>&, const ad::Tensor<float>&,
                                         const TokenSequence&);
template ad::Var embed_contextual<double>(ad::Graph<double>&, const ad::Tensor<float>&,
                                          const TokenSequence&);

}  // namespace dre::emb
