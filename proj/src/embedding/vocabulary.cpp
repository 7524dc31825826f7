#include "dre/embedding/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "dre/data/tokenize.hpp"
#include "dre/error.hpp"

namespace dre::emb {
namespace {

const std::vector<std::string>& reserved() {
  static const std::vector<std::string> names = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
  return names;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const auto& name : reserved()) {
    ids_.emplace(name, tokens_.size());
    tokens_.push_back(name);
  }
}

Vocabulary Vocabulary::build(std::span<const data::PairExample> corpus, std::size_t min_frequency) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : corpus) {
    for (const auto* text : {&ex.text_a, &ex.text_b}) {
      for (auto& tok : data::tokenize(*text)) ++counts[std::move(tok)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  vocab.min_frequency_ = min_frequency;
  for (auto& [tok, count] : ranked) {
    if (count < min_frequency || vocab.ids_.count(tok) != 0) continue;
    vocab.ids_.emplace(tok, vocab.tokens_.size());
    vocab.tokens_.push_back(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_frequency) {
  if (tokens.size() < kReservedTokens ||
      !std::equal(reserved().begin(), reserved().end(), tokens.begin())) {
    throw FormatError("vocabulary must start with [PAD], [CLS], [SEP], [UNK]");
  }
  Vocabulary vocab;
  vocab.min_frequency_ = min_frequency;
  for (std::size_t i = kReservedTokens; i < tokens.size(); ++i) {
    if (!vocab.ids_.emplace(tokens[i], vocab.tokens_.size()).second) {
      throw FormatError("duplicate vocabulary token '" + tokens[i] + "'");
    }
    vocab.tokens_.push_back(std::move(tokens[i]));
  }
  return vocab;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace dre::emb
