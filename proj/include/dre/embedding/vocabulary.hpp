#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dre/data/example.hpp"

namespace dre::emb {

using TokenId = std::size_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kClsId = 1;
inline constexpr TokenId kSepId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr std::size_t kReservedTokens = 4;

class Vocabulary {
 public:
  Vocabulary();

  // Counts tokens over both sides of every pair. After the reserved ids,
  // tokens are ordered by frequency (descending) then lexicographically;
  // tokens seen fewer than min_frequency times are dropped.
  static Vocabulary build(std::span<const data::PairExample> corpus, std::size_t min_frequency);
  // Restores a vocabulary from its full token list (reserved ids first).
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_frequency = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_frequency() const { return min_frequency_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  // [UNK] for unknown tokens.
  TokenId id(std::string_view token) const;
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t min_frequency_ = 1;
};

}  // namespace dre::emb
