#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dre/data/dataset.hpp"
#include "dre/data/tfidf.hpp"
#include "dre/model/model.hpp"
#include "dre/train/train.hpp"

namespace dre::cli {

// Bad invocation or configuration; the process exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every accepted configuration key, e.g. "train.learning_rate".
const std::vector<std::string>& known_keys();

using KeyValues = std::map<std::string, std::string>;

// Flat "section.key = value" lines; '#' starts a comment, blank lines are
// skipped. Unknown keys, duplicate keys and lines without '=' raise
// UsageError naming the key or line.
KeyValues parse_config(std::istream& in, const std::string& source = "config");
KeyValues load_config(const std::string& path);

// Later values win. Keys are checked against known_keys().
void apply_overrides(KeyValues& base, const KeyValues& overrides);

struct RunConfig {
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string questions_path;
  // Empty means "guess from the extension".
  std::string format;
  std::string embeddings_path;
  model::ModelConfig model;
  train::TrainConfig train;
  data::MiningBand band;
  std::string negative_label = "not_match";
  std::vector<std::size_t> ablate_hidden{64, 128, 256};
};

// Typed view with defaults filled in. A malformed value raises UsageError
// naming its key.
RunConfig resolve(const KeyValues& values);

// Effective settings, keyed like the configuration file.
nlohmann::json to_json(const RunConfig& config);

data::DatasetFormat dataset_format(const RunConfig& config, const std::string& path);

}  // namespace dre::cli
