#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dre/embedding/vocabulary.hpp"
#include "dre/model/model.hpp"

namespace dre::train {

// Everything needed to score pairs: model weights plus the vocabulary,
// label names and sequence length used in training.
struct Matcher {
  emb::Vocabulary vocab;
  std::vector<std::string> labels;
  std::size_t max_len = 100;
  model::DreModel<float> model;
  // Free-form training settings stored alongside the weights.
  nlohmann::json metadata = nlohmann::json::object();

  const model::ModelConfig& config() const { return model.config(); }
};

nlohmann::json checkpoint_config(const Matcher& matcher);

void save_matcher(const std::filesystem::path& path, const Matcher& matcher);
// Throws FormatError when the file or its configuration block is malformed.
Matcher load_matcher(const std::filesystem::path& path);

}  // namespace dre::train
