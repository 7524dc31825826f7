#include "dre/data/batch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "dre/data/tokenize.hpp"
#include "dre/error.hpp"

namespace dre::data {

std::size_t label_index(std::span<const std::string> labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ConfigError("label '" + label + "' is not in the label set");
  return static_cast<std::size_t>(it - labels.begin());
}

emb::TokenSequence encode_pair(const emb::Vocabulary& vocab, const std::string& text_a,
                               const std::string& text_b, std::size_t max_len) {
  const auto a = tokenize(text_a);
  const auto b = tokenize(text_b);
  if (a.empty()) throw ConfigError("text_a has no tokens");
  if (b.empty()) throw ConfigError("text_b has no tokens");
  const auto a_ids = vocab.encode(a);
  const auto b_ids = vocab.encode(b);
  return emb::build_joint_sequence(a_ids, b_ids, max_len);
}

std::vector<std::size_t> batch_order(std::size_t count, std::optional<std::uint64_t> shuffle_seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

namespace {

void check_batch_size(std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

}  // namespace

std::vector<Batch> make_batches(std::span<const PairExample> examples,
                                const emb::Vocabulary& vocab,
                                std::span<const std::string> labels, std::size_t batch_size,
                                std::size_t max_len, std::optional<std::uint64_t> shuffle_seed) {
  check_batch_size(batch_size);
  const auto order = batch_order(examples.size(), shuffle_seed);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch batch;
    std::vector<emb::TokenSequence> full;
    for (std::size_t i = start; i < end; ++i) {
      const auto& ex = examples[order[i]];
      try {
        full.push_back(encode_pair(vocab, ex.text_a, ex.text_b, max_len));
      } catch (const ConfigError& e) {
        throw ConfigError("example '" + ex.id + "': " + e.what());
      }
      batch.labels.push_back(label_index(labels, ex.label));
      batch.ids.push_back(ex.id);
      batch.length = std::max(batch.length, full.back().true_length);
    }
    for (const auto& seq : full) batch.rows.push_back(emb::with_length(seq, batch.length));
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<Batch> make_contextual_batches(std::span<const PairExample> examples,
                                           const emb::ContextualStore& store,
                                           std::span<const std::string> labels,
                                           std::size_t batch_size,
                                           std::optional<std::uint64_t> shuffle_seed) {
  check_batch_size(batch_size);
  const auto order = batch_order(examples.size(), shuffle_seed);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch batch;
    for (std::size_t i = start; i < end; ++i) {
      const auto& ex = examples[order[i]];
      const auto& matrix = store.at(ex.id);
      batch.contextual.push_back(&matrix);
      batch.labels.push_back(label_index(labels, ex.label));
      batch.ids.push_back(ex.id);
      batch.length = std::max(batch.length, matrix.rows());
    }
    for (const auto* m : batch.contextual) {
      batch.rows.push_back(emb::dense_sequence(m->rows(), batch.length));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace dre::data
