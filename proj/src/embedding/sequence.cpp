#include "dre/embedding/sequence.hpp"

#include <algorithm>

#include "dre/error.hpp"

namespace dre::emb {

std::pair<std::size_t, std::size_t> truncated_lengths(std::size_t q_len, std::size_t p_len,
                                                      std::size_t max_len) {
  while (q_len + p_len + 3 > max_len) {
    if (q_len > p_len) {
      --q_len;
    } else {
      --p_len;
    }
  }
  return {q_len, p_len};
}

TokenSequence build_joint_sequence(std::span<const TokenId> q, std::span<const TokenId> p,
                                   std::size_t max_len) {
  if (max_len < kMinJointLength) {
    throw ConfigError("max_len " + std::to_string(max_len) +
                      " cannot hold [CLS] q [SEP] p [SEP]; need at least 5");
  }
  if (q.empty() || p.empty()) throw ConfigError("both sides of a pair need at least one token");

  const auto [q_len, p_len] = truncated_lengths(q.size(), p.size(), max_len);
  TokenSequence seq;
  seq.token_ids.reserve(max_len);
  seq.token_ids.push_back(kClsId);
  seq.token_ids.insert(seq.token_ids.end(), q.begin(), q.begin() + q_len);
  seq.token_ids.push_back(kSepId);
  const std::size_t first_segment = seq.token_ids.size();
  seq.token_ids.insert(seq.token_ids.end(), p.begin(), p.begin() + p_len);
  seq.token_ids.push_back(kSepId);
  seq.true_length = seq.token_ids.size();

  seq.token_ids.resize(max_len, kPadId);
  seq.segment_ids.assign(max_len, 0);
  std::fill(seq.segment_ids.begin() + first_segment, seq.segment_ids.end(), 1);
  seq.mask.assign(max_len, 0);
  std::fill_n(seq.mask.begin(), seq.true_length, 1);
  return seq;
}

TokenSequence with_length(const TokenSequence& seq, std::size_t length) {
  if (length < seq.true_length) {
    throw ConfigError("cannot shrink a sequence of " + std::to_string(seq.true_length) +
                      " real tokens to " + std::to_string(length));
  }
  TokenSequence out = seq;
  const std::size_t pad_segment = seq.segment_ids.empty() ? 0 : seq.segment_ids.back();
  out.token_ids.resize(length, kPadId);
  out.segment_ids.resize(length, pad_segment);
  out.mask.resize(length, 0);
  return out;
}

TokenSequence dense_sequence(std::size_t rows, std::size_t length) {
  if (rows == 0 || rows > length) {
    throw ConfigError("dense sequence needs 0 < rows <= length, got rows=" + std::to_string(rows) +
                      " length=" + std::to_string(length));
  }
  TokenSequence seq;
  seq.token_ids.assign(length, kPadId);
  seq.segment_ids.assign(length, 0);
  seq.mask.assign(length, 0);
  std::fill_n(seq.mask.begin(), rows, 1);
  seq.true_length = rows;
  return seq;
}

}  // namespace dre::emb
