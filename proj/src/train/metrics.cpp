#include "dre/train/metrics.hpp"

#include "dre/error.hpp"

namespace dre::train {

Metrics compute_metrics(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> gold, std::size_t num_classes) {
  if (predictions.size() != gold.size()) {
    throw ConfigError(std::to_string(predictions.size()) + " predictions for " +
                      std::to_string(gold.size()) + " gold labels");
  }
  Metrics m;
  m.total = gold.size();
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= num_classes || predictions[i] >= num_classes) {
      throw ConfigError("class index out of range at position " + std::to_string(i));
    }
    ++m.confusion[gold[i]][predictions[i]];
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < num_classes; ++c) correct += m.confusion[c][c];
  m.accuracy = m.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(m.total);

  double f1_sum = 0.0;
  std::size_t present = 0;
  m.per_class.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t predicted = 0;
    std::size_t support = 0;
    for (std::size_t o = 0; o < num_classes; ++o) {
      predicted += m.confusion[o][c];
      support += m.confusion[c][o];
    }
    const double tp = static_cast<double>(m.confusion[c][c]);
    auto& cm = m.per_class[c];
    cm.support = support;
    cm.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    cm.recall = support == 0 ? 0.0 : tp / static_cast<double>(support);
    const double pr = cm.precision + cm.recall;
    cm.f1 = pr == 0.0 ? 0.0 : 2.0 * cm.precision * cm.recall / pr;
    if (support > 0 || predicted > 0) {
      f1_sum += cm.f1;
      ++present;
    }
  }
  m.macro_f1 = present == 0 ? 0.0 : f1_sum / static_cast<double>(present);
  return m;
}

nlohmann::json to_json(const Metrics& metrics, std::span<const std::string> labels) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
    const auto& cm = metrics.per_class[c];
    per_class.push_back({{"label", c < labels.size() ? labels[c] : std::to_string(c)},
                         {"precision", cm.precision},
                         {"recall", cm.recall},
                         {"f1", cm.f1},
                         {"support", cm.support}});
  }
  return {{"total", metrics.total},
          {"accuracy", metrics.accuracy},
          {"macro_f1", metrics.macro_f1},
          {"per_class", per_class},
          {"confusion", metrics.confusion}};
}

}  // namespace dre::train
