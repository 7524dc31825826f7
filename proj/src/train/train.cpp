#include "dre/train/train.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>

#include "dre/autodiff/adam.hpp"
#include "dre/data/tokenize.hpp"
#include "dre/error.hpp"
#include "dre/head/head.hpp"

namespace dre::train {
namespace {

constexpr std::size_t kMaxShards = 8;

bool use_threads(kernels::Exec exec, std::size_t items) {
  return exec == kernels::Exec::parallel && items > 1 && kernels::max_threads() > 1 &&
         !omp_in_parallel();
}

// Runs body(i) for i in [0, n), in parallel when allowed. The first
// exception (lowest index) is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, kernels::Exec exec, Body body) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (use_threads(exec, n)) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::max_threads())
    for (std::ptrdiff_t i = 0; i < count; ++i) guarded(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

double default_learning_rate(emb::EmbeddingMode mode) {
  return mode == emb::EmbeddingMode::lookup ? 1e-3 : 2e-5;
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("train.learning_rate must be positive");
  }
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(c.dropout_retention > 0.0 && c.dropout_retention <= 1.0)) {
    throw ConfigError("train.dropout_retention must lie in (0, 1]");
  }
  if (c.patience == 0) throw ConfigError("train.patience must be positive");
  if (c.max_len < emb::kMinJointLength) throw ConfigError("train.max_len must be at least 5");
  if (!(c.clip_norm > 0.0)) throw ConfigError("train.clip_norm must be positive");
  if (c.vocab_min_frequency == 0) throw ConfigError("vocab.min_frequency must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},       {"dropout_retention", c.dropout_retention},
          {"seed", c.seed},                   {"patience", c.patience},
          {"max_len", c.max_len},             {"clip_norm", c.clip_norm},
          {"vocab_min_frequency", c.vocab_min_frequency}};
}

nlohmann::json to_json(const EpochLog& log) {
  return {{"epoch", log.epoch},
          {"train_loss", log.train_loss},
          {"dev_acc", log.dev_acc},
          {"dev_macro_f1", log.dev_macro_f1},
          {"seconds", log.seconds}};
}

BatchGradient batch_gradients(const model::DreModel<float>& model, const data::Batch& batch,
                              std::span<const std::uint64_t> dropout_seeds, kernels::Exec exec) {
  const std::size_t rows = batch.size();
  if (rows == 0) throw ConfigError("empty batch");
  if (!dropout_seeds.empty() && dropout_seeds.size() != rows) {
    throw ConfigError("need one dropout seed per batch row");
  }
  const auto& params = model.parameters();
  const std::size_t shards = std::min(rows, kMaxShards);
  std::vector<ad::GradientSet<float>> grads(shards, ad::GradientSet<float>(params));
  std::vector<double> losses(shards, 0.0);

  for_each_index(shards, exec, [&](std::size_t s) {
    const std::size_t begin = s * rows / shards;
    const std::size_t end = (s + 1) * rows / shards;
    for (std::size_t i = begin; i < end; ++i) {
      ad::Graph<float> graph(&params, exec);
      std::optional<ad::Rng> rng;
      if (!dropout_seeds.empty()) rng.emplace(dropout_seeds[i]);
      const ad::Tensor<float>* contextual = batch.contextual.empty() ? nullptr : batch.contextual[i];
      const auto pass = model.forward(graph, batch.rows[i], contextual, rng ? &*rng : nullptr);
      const ad::Var loss = head::loss(graph, pass.logits, batch.labels[i]);
      losses[s] += static_cast<double>(graph.value(loss)[0]);
      graph.backward(loss);
      graph.accumulate_parameter_grads(grads[s]);
    }
  });

  BatchGradient out{std::move(grads[0]), losses[0]};
  for (std::size_t s = 1; s < shards; ++s) {
    out.grads.add(grads[s]);
    out.loss_sum += losses[s];
  }
  return out;
}

double apply_gradients(model::DreModel<float>& model, ad::AdamState<float>& state,
                       BatchGradient& gradient, std::size_t batch_size, double clip_norm) {
  gradient.grads.scale(1.0f / static_cast<float>(batch_size));
  const double norm = static_cast<double>(gradient.grads.global_norm());
  if (std::isfinite(norm) && norm > clip_norm) {
    gradient.grads.scale(static_cast<float>(clip_norm / norm));
  }
  auto& params = model.parameters();
  params.zero_grad();
  gradient.grads.add_to(params);
  ad::adam_step(params, state);
  return norm;
}

std::size_t argmax(std::span<const float> values) {
  if (values.empty()) throw ConfigError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Evaluation evaluate(const Matcher& matcher, std::span<const data::PairExample> examples,
                    const emb::ContextualStore* store, kernels::Exec exec) {
  const bool contextual = matcher.config().mode == emb::EmbeddingMode::contextual;
  if (contextual && store == nullptr) throw ConfigError("contextual mode needs an embedding store");

  Evaluation ev;
  std::vector<emb::TokenSequence> seqs;
  std::vector<const ad::Tensor<float>*> matrices;
  seqs.reserve(examples.size());
  for (const auto& ex : examples) {
    ev.gold.push_back(data::label_index(matcher.labels, ex.label));
    if (contextual) {
      const auto& m = store->at(ex.id);
      matrices.push_back(&m);
      seqs.push_back(emb::dense_sequence(m.rows(), m.rows()));
    } else {
      try {
        auto seq = data::encode_pair(matcher.vocab, ex.text_a, ex.text_b, matcher.max_len);
        seqs.push_back(emb::with_length(seq, seq.true_length));
      } catch (const ConfigError& e) {
        throw ConfigError("example '" + ex.id + "': " + e.what());
      }
    }
  }

  ev.predictions.assign(examples.size(), 0);
  for_each_index(examples.size(), exec, [&](std::size_t i) {
    const auto probs = matcher.model.predict(seqs[i], contextual ? matrices[i] : nullptr);
    ev.predictions[i] = argmax(probs);
  });
  ev.metrics = compute_metrics(ev.predictions, ev.gold, matcher.labels.size());
  return ev;
}

Prediction predict_pair(const Matcher& matcher, const std::string& text_a,
                        const std::string& text_b) {
  if (matcher.config().mode != emb::EmbeddingMode::lookup) {
    throw ConfigError("raw-text prediction needs a lookup-mode model");
  }
  const auto seq = data::encode_pair(matcher.vocab, text_a, text_b, matcher.max_len);
  Prediction p;
  p.probabilities = matcher.model.predict(emb::with_length(seq, seq.true_length));
  p.index = argmax(p.probabilities);
  p.label = matcher.labels[p.index];
  return p;
}

TrainResult train(const model::ModelConfig& model_config, const TrainConfig& config,
                  const data::Dataset& train_set, std::span<const data::PairExample> dev,
                  const emb::ContextualStore* store, const TrainCallbacks& callbacks) {
  validate(config);
  if (train_set.examples.empty()) throw ConfigError("training set is empty");

  model::ModelConfig mc = model_config;
  mc.encoder.dropout_retention = config.dropout_retention;
  std::vector<std::string> labels = train_set.labels;
  for (const auto& ex : dev) {
    if (std::find(labels.begin(), labels.end(), ex.label) == labels.end()) labels.push_back(ex.label);
  }
  mc.num_classes = labels.size();

  emb::Vocabulary vocab;
  if (mc.mode == emb::EmbeddingMode::lookup) {
    vocab = emb::Vocabulary::build(train_set.examples, config.vocab_min_frequency);
  } else {
    if (store == nullptr) throw ConfigError("contextual mode needs an embedding store");
    if (store->dimension() != mc.embedding_dim) {
      throw ConfigError("embedding store has dimension " + std::to_string(store->dimension()) +
                        ", model.embedding_dim is " + std::to_string(mc.embedding_dim));
    }
  }
  mc.vocab_size = vocab.size();

  ad::Rng run(config.seed);
  const std::uint64_t init_seed = run();
  Matcher current{vocab, labels, config.max_len, model::DreModel<float>(mc, init_seed),
                  to_json(config)};
  ad::AdamState<float> adam(current.model.parameters(), {.learning_rate = config.learning_rate});

  TrainResult result{current, {}, 0, false};
  if (callbacks.on_best) callbacks.on_best(result.best);

  const std::span<const data::PairExample> selection =
      dev.empty() ? std::span<const data::PairExample>(train_set.examples) : dev;
  double best_f1 = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t shuffle_seed = run();
    const auto batches =
        mc.mode == emb::EmbeddingMode::lookup
            ? data::make_batches(train_set.examples, vocab, labels, config.batch_size,
                                 config.max_len, shuffle_seed)
            : data::make_contextual_batches(train_set.examples, *store, labels,
                                            config.batch_size, shuffle_seed);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : batches) {
      std::vector<std::uint64_t> seeds(batch.size());
      for (auto& s : seeds) s = run();
      auto gradient = batch_gradients(current.model, batch, seeds);
      if (!std::isfinite(gradient.loss_sum)) {
        throw NumericError("training loss is not finite in epoch " + std::to_string(epoch));
      }
      loss_sum += gradient.loss_sum;
      seen += batch.size();
      apply_gradients(current.model, adam, gradient, batch.size(), config.clip_norm);
    }

    const auto ev = evaluate(current, selection, store);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(seen);
    entry.dev_acc = ev.metrics.accuracy;
    entry.dev_macro_f1 = ev.metrics.macro_f1;
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(entry);
    if (callbacks.on_epoch) callbacks.on_epoch(entry);

    if (entry.dev_macro_f1 > best_f1) {
      best_f1 = entry.dev_macro_f1;
      result.best = current;
      result.best_epoch = epoch;
      since_best = 0;
      if (callbacks.on_best) callbacks.on_best(result.best);
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
    if (callbacks.should_stop && callbacks.should_stop(entry)) break;
  }
  return result;
}

}  // namespace dre::train
