#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace dre::train {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  std::size_t total = 0;
  double accuracy = 0.0;
  // Mean F1 over the classes that occur in the gold labels or the
  // predictions.
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  // confusion[gold][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

// Precision, recall and F1 are 0 when their denominator is 0. Throws
// ConfigError on length mismatch or an index >= num_classes.
Metrics compute_metrics(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> gold, std::size_t num_classes);

nlohmann::json to_json(const Metrics& metrics, std::span<const std::string> labels);

}  // namespace dre::train
