#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dre/autodiff/graph.hpp"
#include "dre/embedding/vocabulary.hpp"

namespace dre::emb {

// Joint pair layout: [CLS] q_1..q_I [SEP] p_1..p_J [SEP] then [PAD]s.
// Segment 0 covers [CLS], the question and the first [SEP].
struct TokenSequence {
  std::vector<TokenId> token_ids;
  std::vector<std::size_t> segment_ids;
  ad::Mask mask;
  std::size_t true_length = 0;

  std::size_t length() const { return mask.size(); }
  bool operator==(const TokenSequence&) const = default;
};

// Smallest max_len that holds one token per side.
inline constexpr std::size_t kMinJointLength = 5;

// Side lengths after longest-first truncation: while the pair does not fit,
// drop the last token of the longer side (the second side on ties).
std::pair<std::size_t, std::size_t> truncated_lengths(std::size_t q_len, std::size_t p_len,
                                                      std::size_t max_len);

// Builds the padded joint sequence of length max_len. Throws ConfigError for
// max_len < 5 or an empty side.
TokenSequence build_joint_sequence(std::span<const TokenId> q, std::span<const TokenId> p,
                                   std::size_t max_len);

// Shortens or extends the padding so the sequence has exactly `length`
// positions. Real tokens are never dropped.
TokenSequence with_length(const TokenSequence& seq, std::size_t length);

// All-real sequence of `rows` positions, used for precomputed embeddings.
TokenSequence dense_sequence(std::size_t rows, std::size_t length);

}  // namespace dre::emb
