#include "dre/data/synthetic.hpp"

#include <algorithm>
#include <random>

namespace dre::data {
namespace {

const char* const kSyllables[] = {"ka", "lo", "mi", "ru", "te", "sa", "no", "vi",
                                  "du", "pe", "zo", "ha", "ri", "gu", "fe", "bo"};

std::string word(std::size_t n) {
  std::string w;
  do {
    w += kSyllables[n % 16];
    n /= 16;
  } while (n > 0);
  return w + kSyllables[(n + w.size()) % 16];
}

}  // namespace

Dataset synthetic_matching_set(std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t topics = std::max<std::size_t>(2, (pairs + 1) / 2);
  std::vector<std::size_t> word_ids(topics * 3);
  for (std::size_t i = 0; i < word_ids.size(); ++i) word_ids[i] = 17 + i;
  std::shuffle(word_ids.begin(), word_ids.end(), rng);
  auto w = [&](std::size_t topic, std::size_t k) { return word(word_ids[topic * 3 + k]); };

  const char* const openers[] = {"what is the", "where is the", "how big is the", "who owns the"};
  const char* const rewordings[] = {"tell me about", "i want to know", "explain", "describe"};
  auto question = [&](std::size_t t) {
    return std::string(openers[t % 4]) + " " + w(t, 0) + " of " + w(t, 1) + " " + w(t, 2) + " ?";
  };
  auto reworded = [&](std::size_t t, std::size_t style) {
    return std::string(rewordings[style % 4]) + " " + w(t, 1) + " " + w(t, 2) + " " + w(t, 0) + " .";
  };

  Dataset ds;
  ds.labels = {"match", "not_match"};
  std::uniform_int_distribution<std::size_t> shift(1, topics - 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t t = (i / 2) % topics;
    const bool positive = i % 2 == 0;
    const std::size_t other = positive ? t : (t + shift(rng)) % topics;
    ds.examples.push_back({"toy-" + std::to_string(i), question(t), reworded(other, i / 2),
                           positive ? "match" : "not_match"});
  }
  return ds;
}

std::vector<std::string> synthetic_questions(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // A few frequent words and a longer tail.
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < 40; ++i) vocab.push_back(word(100 + i));
  std::vector<double> weights;
  for (std::size_t i = 0; i < vocab.size(); ++i) weights.push_back(1.0 / (1.0 + 0.15 * i));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(5, 9);

  std::vector<std::string> out;
  for (std::size_t q = 0; q < count; ++q) {
    std::string text;
    const std::size_t n = length(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) text += ' ';
      text += vocab[pick(rng)];
    }
    out.push_back(text + " ?");
  }
  return out;
}

}  // namespace dre::data
