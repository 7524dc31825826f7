#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dre/autodiff/adam.hpp"
#include "dre/autodiff/kernels.hpp"
#include "dre/autodiff/parameters.hpp"
#include "dre/data/batch.hpp"
#include "dre/data/dataset.hpp"
#include "dre/embedding/contextual_store.hpp"
#include "dre/train/matcher.hpp"
#include "dre/train/metrics.hpp"

namespace dre::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  double dropout_retention = 0.5;
  std::uint64_t seed = 7;
  std::size_t patience = 5;
  std::size_t max_len = 100;
  double clip_norm = 5.0;
  std::size_t vocab_min_frequency = 1;
};

// 1e-3 for trainable lookup tables, 2e-5 on top of frozen contextual vectors.
double default_learning_rate(emb::EmbeddingMode mode);

void validate(const TrainConfig& config);
nlohmann::json to_json(const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_acc = 0.0;
  double dev_macro_f1 = 0.0;
  double seconds = 0.0;
};

nlohmann::json to_json(const EpochLog& log);

struct TrainCallbacks {
  std::function<void(const EpochLog&)> on_epoch;
  // Called with the initial model and again whenever dev macro-F1 improves.
  std::function<void(const Matcher&)> on_best;
  // Ends training after the epoch when it returns true.
  std::function<bool(const EpochLog&)> should_stop;
};

struct TrainResult {
  Matcher best;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

// Model settings other than vocab_size and num_classes, which come from the
// training data. An empty dev set selects on training metrics instead.
// Throws NumericError when the loss or a gradient stops being finite; the
// most recent on_best model is then the last good one.
TrainResult train(const model::ModelConfig& model_config, const TrainConfig& config,
                  const data::Dataset& train_set, std::span<const data::PairExample> dev,
                  const emb::ContextualStore* store = nullptr, const TrainCallbacks& callbacks = {});

struct BatchGradient {
  ad::GradientSet<float> grads;
  double loss_sum = 0.0;
};

// Summed per-example gradients and losses for one batch. Examples are
// split into min(B, 8) contiguous shards whose sums are added in shard
// order, so serial and parallel execution agree bit for bit. One dropout
// seed per row enables dropout; an empty span disables it.
BatchGradient batch_gradients(const model::DreModel<float>& model, const data::Batch& batch,
                              std::span<const std::uint64_t> dropout_seeds,
                              kernels::Exec exec = kernels::Exec::parallel);

// Mean gradient, clip to clip_norm, one Adam step. Returns the pre-clip norm.
double apply_gradients(model::DreModel<float>& model, ad::AdamState<float>& state,
                       BatchGradient& gradient, std::size_t batch_size, double clip_norm);

struct Evaluation {
  Metrics metrics;
  std::vector<std::size_t> predictions;
  std::vector<std::size_t> gold;
};

// Dropout off. Throws ConfigError for a label the matcher does not know or
// an example missing from the store in contextual mode.
Evaluation evaluate(const Matcher& matcher, std::span<const data::PairExample> examples,
                    const emb::ContextualStore* store = nullptr,
                    kernels::Exec exec = kernels::Exec::parallel);

// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const float> values);

struct Prediction {
  std::string label;
  std::size_t index = 0;
  std::vector<float> probabilities;
};

// Lookup mode only. Throws ConfigError for an empty text.
Prediction predict_pair(const Matcher& matcher, const std::string& text_a,
                        const std::string& text_b);

}  // namespace dre::train
