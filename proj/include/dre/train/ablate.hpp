#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dre/train/train.hpp"

namespace dre::train {

struct AblationConfig {
  std::string id;           // "1a" .. "3"
  std::string description;  // "3Layer-Lstm", "3Lstm-64Hidden", ...
  std::size_t layers = 3;
  std::size_t hidden = 128;
  bool residual = true;
};

// Layer sweep 1..5 at base_hidden (1a-1e), three-layer hidden sweep (2a-2c),
// and three layers without residual wiring (3).
std::vector<AblationConfig> ablation_grid(std::size_t base_hidden,
                                        std::span<const std::size_t> hidden_sizes = {});

struct AblationRow {
  AblationConfig config;
  std::size_t parameters = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double train_f1 = 0.0;
  double dev_f1 = 0.0;
  // Absent without a test split.
  std::optional<double> test_f1;
};

struct AblationData {
  const data::Dataset* train = nullptr;
  std::span<const data::PairExample> dev;
  std::span<const data::PairExample> test;
  const emb::ContextualStore* store = nullptr;
};

// Trains and evaluates every configuration with the same seed and data.
std::vector<AblationRow> ablate(const model::ModelConfig& base, const TrainConfig& config,
                                const AblationData& data, std::span<const AblationConfig> grid,
                                const std::function<void(const AblationRow&)>& on_row = {});

// Tab-separated table, one row per configuration, after a "#" line listing
// the training defaults shared by every row.
void write_ablation_tsv(std::ostream& out, std::span<const AblationRow> rows,
                        const TrainConfig& config);

}  // namespace dre::train
