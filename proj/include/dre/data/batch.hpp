#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dre/data/example.hpp"
#include "dre/embedding/contextual_store.hpp"
#include "dre/embedding/sequence.hpp"
#include "dre/embedding/vocabulary.hpp"

namespace dre::data {

// Padded rows share one length T = min(longest real length, max_len).
struct Batch {
  std::vector<emb::TokenSequence> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;
  // Contextual mode: stored matrix per row, owned by the store.
  std::vector<const ad::Tensor<float>*> contextual;
  std::size_t length = 0;

  std::size_t size() const { return rows.size(); }
};

// Index of `label` in `labels`; ConfigError naming it otherwise.
std::size_t label_index(std::span<const std::string> labels, const std::string& label);

// Tokenizes both sides and builds the joint sequence padded to max_len.
// Throws ConfigError when a side has no tokens.
emb::TokenSequence encode_pair(const emb::Vocabulary& vocab, const std::string& text_a,
                               const std::string& text_b, std::size_t max_len);

// Visiting order: input order, or std::shuffle with mt19937_64(seed).
std::vector<std::size_t> batch_order(std::size_t count, std::optional<std::uint64_t> shuffle_seed);

std::vector<Batch> make_batches(std::span<const PairExample> examples,
                                const emb::Vocabulary& vocab,
                                std::span<const std::string> labels, std::size_t batch_size,
                                std::size_t max_len,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Rows come straight from the store: every stored position is real and the
// batch length is the longest stored T.
std::vector<Batch> make_contextual_batches(std::span<const PairExample> examples,
                                           const emb::ContextualStore& store,
                                           std::span<const std::string> labels,
                                           std::size_t batch_size,
                                           std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace dre::data
