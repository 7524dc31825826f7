#include <gtest/gtest.h>

#include <sstream>

#include "dre/embedding/contextual_store.hpp"
#include "dre/embedding/embedding.hpp"
#include "dre/embedding/sequence.hpp"
#include "dre/embedding/vocabulary.hpp"
#include "dre/error.hpp"
#include "test_support.hpp"

using namespace dre;
using namespace dre::emb;
using dre::testing::random_tensor;
using dre::testing::TempDir;

namespace {

std::vector<TokenId> ids(std::size_t n, TokenId first = 10) {
  std::vector<TokenId> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = first + i;
  return out;
}

// Closed form of longest-first truncation: when both sides are too long the
// budget splits evenly with the odd token going to the question.
std::pair<std::size_t, std::size_t> expected_lengths(std::size_t q, std::size_t p, std::size_t max_len) {
  const std::size_t budget = max_len - 3;
  if (q + p <= budget) return {q, p};
  const std::size_t q_half = (budget + 1) / 2, p_half = budget / 2;
  if (q < q_half) return {q, budget - q};
  if (p < p_half) return {budget - p, p};
  return {q_half, p_half};
}

}  // namespace

TEST(Vocabulary, ReservedIdsComeFirst) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.token(kPadId), "[PAD]");
  EXPECT_EQ(v.token(kClsId), "[CLS]");
  EXPECT_EQ(v.token(kSepId), "[SEP]");
  EXPECT_EQ(v.token(kUnkId), "[UNK]");
}

TEST(Vocabulary, OrdersByFrequencyThenLexically) {
  const std::vector<data::PairExample> corpus = {
      {"1", "b a c", "a b", "x"},
      {"2", "a d", "e", "y"},
  };
  const auto v = Vocabulary::build(corpus, 1);
  // a:3 b:2 then c d e once each.
  const std::vector<std::string> expected = {"[PAD]", "[CLS]", "[SEP]", "[UNK]", "a", "b", "c", "d", "e"};
  EXPECT_EQ(v.tokens(), expected);
  const auto pruned = Vocabulary::build(corpus, 2);
  EXPECT_EQ(pruned.size(), 6u);
  EXPECT_EQ(pruned.id("c"), kUnkId);
  EXPECT_EQ(pruned.id("a"), 4u);
  EXPECT_THROW(Vocabulary::build(std::span<const data::PairExample>{}, 1), ConfigError);
}

TEST(Vocabulary, SinglePairExample) {
  const std::vector<data::PairExample> corpus = {{"1", "a b", "b c", "x"}};
  const auto v = Vocabulary::build(corpus, 1);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"[PAD]", "[CLS]", "[SEP]", "[UNK]", "b", "a", "c"}));
  const auto strict = Vocabulary::build(corpus, 2);
  EXPECT_EQ(strict.size(), 5u);
  EXPECT_EQ(strict.id("a"), kUnkId);
  EXPECT_EQ(strict.id("c"), kUnkId);
  EXPECT_EQ(Vocabulary::build(corpus, 1).tokens(), v.tokens());
}

TEST(Vocabulary, UnknownTokensMapToUnk) {
  const std::vector<data::PairExample> corpus = {{"1", "hello world", "hello", "x"}};
  const auto v = Vocabulary::build(corpus, 1);
  const std::vector<std::string> toks = {"hello", "mars", "world"};
  EXPECT_EQ(v.encode(toks), (std::vector<TokenId>{4, kUnkId, 5}));
}

TEST(Vocabulary, RoundTripsThroughTokenList) {
  const std::vector<data::PairExample> corpus = {{"1", "x y z", "y", "l"}};
  const auto v = Vocabulary::build(corpus, 1);
  const auto back = Vocabulary::from_tokens(v.tokens(), 1);
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.id("z"), v.id("z"));
  EXPECT_THROW(Vocabulary::from_tokens({"a", "b"}), FormatError);
  EXPECT_THROW(Vocabulary::from_tokens({"[PAD]", "[CLS]", "[SEP]", "[UNK]", "q", "q"}), FormatError);
}

TEST(JointSequence, ShortPairLayout) {
  const auto seq = build_joint_sequence(ids(2), ids(3, 20), 10);
  const std::vector<TokenId> tok = {kClsId, 10, 11, kSepId, 20, 21, 22, kSepId, kPadId, kPadId};
  EXPECT_EQ(seq.token_ids, tok);
  EXPECT_EQ(seq.segment_ids, (std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(seq.mask, (ad::Mask{1, 1, 1, 1, 1, 1, 1, 1, 0, 0}));
  EXPECT_EQ(seq.true_length, 8u);
  EXPECT_EQ(seq.length(), 10u);
}

TEST(JointSequence, TwoPlusOneInTen) {
  const auto seq = build_joint_sequence(ids(2), ids(1, 20), 10);
  EXPECT_EQ(seq.true_length, 6u);
  EXPECT_EQ(seq.token_ids, (std::vector<TokenId>{kClsId, 10, 11, kSepId, 20, kSepId, 0, 0, 0, 0}));
  EXPECT_EQ(seq.segment_ids[3], 0u);
  EXPECT_EQ(seq.segment_ids[4], 1u);
  const auto full = build_joint_sequence(ids(1), ids(1), 5);
  EXPECT_EQ(full.true_length, 5u);
  EXPECT_EQ(full.length(), 5u);
}

TEST(JointSequence, LongPairsSplitTheBudget) {
  const auto seq = build_joint_sequence(ids(200), ids(200, 500), 100);
  EXPECT_EQ(seq.true_length, 100u);
  EXPECT_EQ(truncated_lengths(200, 200, 100), (std::pair<std::size_t, std::size_t>{49, 48}));
  // Kept tokens are the leading ones of each side.
  EXPECT_EQ(seq.token_ids[49], 58u);
  EXPECT_EQ(seq.token_ids[50], kSepId);
  EXPECT_EQ(seq.token_ids[51], 500u);
  EXPECT_EQ(seq.token_ids[98], 547u);
  EXPECT_EQ(seq.token_ids[99], kSepId);
}

TEST(JointSequence, OnlyTheLongerSideShrinks) {
  EXPECT_EQ(truncated_lengths(10, 200, 100), (std::pair<std::size_t, std::size_t>{10, 87}));
  EXPECT_EQ(truncated_lengths(300, 5, 100), (std::pair<std::size_t, std::size_t>{92, 5}));
  EXPECT_EQ(truncated_lengths(3, 4, 100), (std::pair<std::size_t, std::size_t>{3, 4}));
}

TEST(JointSequence, TruncationMatchesClosedForm) {
  for (std::size_t max_len : {5u, 6u, 7u, 12u, 33u, 100u}) {
    for (std::size_t q = 1; q <= 60; ++q) {
      for (std::size_t p = 1; p <= 60; ++p) {
        const auto got = truncated_lengths(q, p, max_len);
        ASSERT_EQ(got, expected_lengths(q, p, max_len)) << q << " " << p << " " << max_len;
        const auto seq = build_joint_sequence(ids(q), ids(p), max_len);
        ASSERT_LE(seq.true_length, max_len);
        ASSERT_GE(got.first, 1u);
        ASSERT_GE(got.second, 1u);
      }
    }
  }
}

TEST(JointSequence, RejectsImpossibleInputs) {
  EXPECT_THROW(build_joint_sequence(ids(1), ids(1), 4), ConfigError);
  EXPECT_THROW(build_joint_sequence({}, ids(1), 10), ConfigError);
  EXPECT_THROW(build_joint_sequence(ids(1), {}, 10), ConfigError);
  EXPECT_NO_THROW(build_joint_sequence(ids(1), ids(1), kMinJointLength));
}

TEST(JointSequence, WithLengthKeepsRealTokens) {
  const auto seq = build_joint_sequence(ids(2), ids(2), 20);
  const auto shorter = with_length(seq, 7);
  EXPECT_EQ(shorter.length(), 7u);
  EXPECT_EQ(shorter.true_length, 7u);
  EXPECT_EQ(with_length(shorter, 20), seq);
  EXPECT_THROW(with_length(seq, 6), ConfigError);
}

TEST(JointSequence, DenseSequence) {
  const auto seq = dense_sequence(3, 5);
  EXPECT_EQ(seq.mask, (ad::Mask{1, 1, 1, 0, 0}));
  EXPECT_EQ(seq.true_length, 3u);
  EXPECT_THROW(dense_sequence(0, 5), ConfigError);
  EXPECT_THROW(dense_sequence(6, 5), ConfigError);
}

TEST(EmbeddingMode, ParsesNames) {
  EXPECT_EQ(parse_embedding_mode("lookup"), EmbeddingMode::lookup);
  EXPECT_EQ(parse_embedding_mode("contextual"), EmbeddingMode::contextual);
  EXPECT_EQ(to_string(EmbeddingMode::contextual), "contextual");
  EXPECT_THROW(parse_embedding_mode("bert"), ConfigError);
}

TEST(Lookup, RowsAreTokenPlusSegment) {
  ad::Rng rng(3);
  ad::ParameterSet<double> params;
  add_lookup_parameters(params, 30, 6, rng);
  const auto& table = params[params.index_of(std::string(kTokenTableName))];
  const auto& segs = params[params.index_of(std::string(kSegmentTableName))];
  EXPECT_EQ(table.shape(), (ad::Shape{30, 6}));
  EXPECT_EQ(segs.shape(), (ad::Shape{2, 6}));
  for (double v : table.data()) EXPECT_LE(std::abs(v), kEmbeddingInitRange);
  for (double v : segs.data()) EXPECT_LE(std::abs(v), kEmbeddingInitRange);

  const auto seq = build_joint_sequence(std::vector<TokenId>{7}, std::vector<TokenId>{9, 12}, 8);
  ad::Graph<double> g(&params);
  const auto e = g.value(embed_lookup(g, seq));
  ASSERT_EQ(e.shape(), (ad::Shape{8, 6}));
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t c = 0; c < 6; ++c) {
      const double want = seq.mask[t] ? table.at(seq.token_ids[t], c) + segs.at(seq.segment_ids[t], c) : 0.0;
      EXPECT_EQ(e.at(t, c), want) << t << "," << c;
    }
  }
}

TEST(Lookup, PaddingRowsGetNoGradient) {
  ad::Rng rng(4);
  ad::ParameterSet<double> params;
  add_lookup_parameters(params, 16, 4, rng);
  ad::GradientSet<double> grads(params);
  const auto seq = build_joint_sequence(std::vector<TokenId>{5}, std::vector<TokenId>{6}, 9);
  ad::Graph<double> g(&params);
  const auto e = embed_lookup(g, seq);
  const auto pooled = g.reshape(g.masked_mean(g.tanh(e), seq.mask), ad::Shape{1, 4});
  g.backward(g.softmax_cross_entropy(pooled, 0));
  g.accumulate_parameter_grads(grads);
  const auto& gt = grads[params.index_of(std::string(kTokenTableName))];
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(gt[kPadId * 4 + c], 0.0);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NE(gt[5 * 4 + c], 0.0);
}

TEST(Contextual, PadsToSequenceLength) {
  ad::Rng rng(5);
  const auto m = random_tensor<float>(ad::Shape{3, 4}, rng);
  ad::Graph<float> g;
  const auto e = g.value(embed_contextual(g, m, dense_sequence(3, 6)));
  ASSERT_EQ(e.shape(), (ad::Shape{6, 4}));
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(e.at(2, c), m.at(2, c));
    EXPECT_EQ(e.at(5, c), 0.0f);
  }
  EXPECT_THROW(embed_contextual(g, m, dense_sequence(2, 6)), ShapeError);
}

TEST(ContextualStore, RoundTripsBitExact) {
  ad::Rng rng(6);
  ContextualStore store(5);
  store.insert("a", random_tensor<float>(ad::Shape{3, 5}, rng));
  store.insert("گل", random_tensor<float>(ad::Shape{1, 5}, rng));
  std::stringstream buf;
  store.write(buf);
  // magic + k + count, then per entry id_len + id + T + floats
  EXPECT_EQ(buf.str().size(), 12u + (4 + 1 + 4 + 60) + (4 + 4 + 4 + 20));
  EXPECT_EQ(buf.str().substr(0, 4), "DREE");
  const auto back = ContextualStore::read(buf);
  EXPECT_EQ(back.dimension(), 5u);
  EXPECT_EQ(back.ids(), store.ids());
  EXPECT_EQ(back.at("a").values(), store.at("a").values());
  EXPECT_EQ(back.at("گل").values(), store.at("گل").values());

  TempDir dir;
  store.save(dir / "s.dree");
  EXPECT_EQ(ContextualStore::load(dir / "s.dree", 5).size(), 2u);
}

TEST(ContextualStore, RejectsMalformedInput) {
  ad::Rng rng(7);
  ContextualStore store(2);
  store.insert("x", random_tensor<float>(ad::Shape{2, 2}, rng));
  std::stringstream buf;
  store.write(buf);
  const std::string bytes = buf.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  try {
    ContextualStore::read(truncated);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  std::istringstream bad_magic("DREX" + bytes.substr(4));
  EXPECT_THROW(ContextualStore::read(bad_magic), FormatError);
  std::istringstream wrong_dim(bytes);
  EXPECT_THROW(ContextualStore::read(wrong_dim, 3), ConfigError);
  EXPECT_THROW(store.at("missing"), ConfigError);
  EXPECT_THROW(store.insert("y", random_tensor<float>(ad::Shape{2, 3}, rng)), ShapeError);
  EXPECT_THROW(ContextualStore::load("/nonexistent/file.dree"), ConfigError);
}
