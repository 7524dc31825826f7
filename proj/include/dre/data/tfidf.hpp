#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dre/autodiff/kernels.hpp"

namespace dre::data {

// Sparse L2-normalized document vector, entries sorted by term id.
struct TfidfVector {
  std::vector<std::pair<std::size_t, double>> entries;
  // Set when the document had no known terms; entries is then empty.
  bool zero = true;
};

// tf is the raw count, idf = ln((1+N)/(1+df)) + 1. Terms are the tokenizer's
// output minus punctuation tokens.
class TfidfModel {
 public:
  // Throws ConfigError on an empty corpus.
  static TfidfModel fit(std::span<const std::string> corpus);

  TfidfVector transform(const std::string& text) const;

  std::size_t document_count() const { return documents_; }
  std::size_t term_count() const { return idf_.size(); }
  // Throws ConfigError for an unknown term.
  double idf(const std::string& term) const;
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::size_t documents_ = 0;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> ids_;
};

std::vector<std::string> tfidf_terms(const std::string& text);

// Dot product of two normalized vectors, clamped to [0, 1]; 0 when either is
// the zero vector.
double cosine(const TfidfVector& u, const TfidfVector& v);

// Row-major n x n cosine table. The parallel variant splits rows across
// threads and produces the same values.
std::vector<double> similarity_matrix(std::span<const TfidfVector> docs,
                                      kernels::Exec exec = kernels::Exec::parallel);

struct Question {
  std::string id;
  std::string text;
};

struct MiningBand {
  double low = 0.10;
  double high = 0.20;
};

struct MinedNegative {
  std::size_t anchor = 0;
  std::size_t candidate = 0;
  double similarity = 0.0;
};

struct UnmatchedAnchor {
  std::size_t anchor = 0;
  // Highest similarity to any other question.
  double best_similarity = 0.0;
  // "above_band", "below_band" or "band_gap" (others fall on both sides).
  std::string reason;
};

struct MiningResult {
  std::vector<MinedNegative> negatives;
  std::vector<UnmatchedAnchor> unmatched;
};

// For each anchor picks the other question with the highest cosine inside
// [low, high], lowest index on ties. Throws ConfigError when low > high or
// fewer than two questions are given.
MiningResult mine_negatives(std::span<const std::string> questions, MiningBand band = {},
                            kernels::Exec exec = kernels::Exec::parallel);

// jsonl questions ({"id", "text"}) or one question per line with ids "q<index>".
std::vector<Question> load_questions(const std::string& path);

}  // namespace dre::data
