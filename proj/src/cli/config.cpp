#include "dre/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dre::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void check_key(const std::string& key, const std::string& where) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw UsageError(where + "unknown configuration key '" + key + "'");
  }
}

class Reader {
 public:
  explicit Reader(const KeyValues& values) : values_(values) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_count(key, it->second);
  }

  double real(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw UsageError(key + ": expected a number, got '" + it->second + "'");
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw UsageError(key + ": expected on or off, got '" + v + "'");
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::size_t> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_count(key, trim(item)));
    return out;
  }

 private:
  static std::size_t parse_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty()) {
      throw UsageError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  const KeyValues& values_;
};

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "data.train",          "data.dev",           "data.test",
      "data.format",         "data.questions",     "model.mode",
      "model.embeddings",    "model.embedding_dim", "model.layers",
      "model.hidden",        "model.residual",     "model.head_hidden",
      "vocab.min_frequency", "train.learning_rate", "train.batch_size",
      "train.max_epochs",    "train.dropout_retention", "train.seed",
      "train.patience",      "train.max_len",      "train.clip_norm",
      "mine.low",            "mine.high",          "mine.negative_label",
      "ablate.hidden_sizes",
  };
  return keys;
}

KeyValues parse_config(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    check_key(key, where);
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw UsageError(where + "duplicate key '" + key + "'");
    }
  }
  return out;
}

KeyValues load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  return parse_config(in, path);
}

void apply_overrides(KeyValues& base, const KeyValues& overrides) {
  for (const auto& [key, value] : overrides) {
    check_key(key, "");
    base[key] = value;
  }
}

RunConfig resolve(const KeyValues& values) {
  const Reader r(values);
  RunConfig c;
  c.train_path = r.text("data.train", "");
  c.dev_path = r.text("data.dev", "");
  c.test_path = r.text("data.test", "");
  c.questions_path = r.text("data.questions", "");
  c.format = r.text("data.format", "");
  if (!c.format.empty() && c.format != "jsonl" && c.format != "tsv") {
    throw UsageError("data.format: expected jsonl or tsv, got '" + c.format + "'");
  }
  c.embeddings_path = r.text("model.embeddings", "");

  try {
    c.model.mode = emb::parse_embedding_mode(r.text("model.mode", "lookup"));
  } catch (const Error& e) {
    throw UsageError(std::string("model.mode: ") + e.what());
  }
  c.model.embedding_dim = r.count("model.embedding_dim", 128);
  c.model.encoder.num_layers = r.count("model.layers", 3);
  c.model.encoder.hidden_size = r.count("model.hidden", 128);
  c.model.encoder.residual = r.flag("model.residual", true);
  c.model.head_hidden = r.count("model.head_hidden", 256);

  c.train.learning_rate = r.real("train.learning_rate", train::default_learning_rate(c.model.mode));
  c.train.batch_size = r.count("train.batch_size", 32);
  c.train.max_epochs = r.count("train.max_epochs", 30);
  c.train.dropout_retention = r.real("train.dropout_retention", 0.5);
  c.train.seed = r.count("train.seed", 7);
  c.train.patience = r.count("train.patience", 5);
  c.train.max_len = r.count("train.max_len", 100);
  c.train.clip_norm = r.real("train.clip_norm", 5.0);
  c.train.vocab_min_frequency = r.count("vocab.min_frequency", 1);
  c.model.encoder.dropout_retention = c.train.dropout_retention;

  c.band.low = r.real("mine.low", 0.10);
  c.band.high = r.real("mine.high", 0.20);
  c.negative_label = r.text("mine.negative_label", "not_match");
  c.ablate_hidden = r.counts("ablate.hidden_sizes", {64, 128, 256});
  if (c.ablate_hidden.size() != 3) {
    throw UsageError("ablate.hidden_sizes: expected three comma-separated sizes");
  }

  auto positive = [](const char* key, std::size_t v) {
    if (v == 0) throw UsageError(std::string(key) + ": must be positive");
  };
  positive("model.embedding_dim", c.model.embedding_dim);
  positive("model.layers", c.model.encoder.num_layers);
  positive("model.hidden", c.model.encoder.hidden_size);
  positive("model.head_hidden", c.model.head_hidden);
  positive("train.batch_size", c.train.batch_size);
  positive("train.patience", c.train.patience);
  positive("vocab.min_frequency", c.train.vocab_min_frequency);
  if (!(c.train.learning_rate > 0.0)) throw UsageError("train.learning_rate: must be positive");
  if (!(c.train.dropout_retention > 0.0 && c.train.dropout_retention <= 1.0)) {
    throw UsageError("train.dropout_retention: must lie in (0, 1]");
  }
  if (c.train.max_len < emb::kMinJointLength) throw UsageError("train.max_len: must be at least 5");
  if (!(c.train.clip_norm > 0.0)) throw UsageError("train.clip_norm: must be positive");
  if (c.band.low > c.band.high) {
    throw UsageError("mine.low: band is inverted (" + std::to_string(c.band.low) + " > " +
                     std::to_string(c.band.high) + ")");
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"data.train", c.train_path},
      {"data.dev", c.dev_path},
      {"data.test", c.test_path},
      {"data.questions", c.questions_path},
      {"data.format", c.format.empty() ? "auto" : c.format},
      {"model.mode", std::string(emb::to_string(c.model.mode))},
      {"model.embeddings", c.embeddings_path},
      {"model.embedding_dim", c.model.embedding_dim},
      {"model.layers", c.model.encoder.num_layers},
      {"model.hidden", c.model.encoder.hidden_size},
      {"model.residual", c.model.encoder.residual ? "on" : "off"},
      {"model.head_hidden", c.model.head_hidden},
      {"vocab.min_frequency", c.train.vocab_min_frequency},
      {"train.learning_rate", c.train.learning_rate},
      {"train.batch_size", c.train.batch_size},
      {"train.max_epochs", c.train.max_epochs},
      {"train.dropout_retention", c.train.dropout_retention},
      {"train.seed", c.train.seed},
      {"train.patience", c.train.patience},
      {"train.max_len", c.train.max_len},
      {"train.clip_norm", c.train.clip_norm},
      {"mine.low", c.band.low},
      {"mine.high", c.band.high},
      {"mine.negative_label", c.negative_label},
      {"ablate.hidden_sizes", c.ablate_hidden},
  };
}

data::DatasetFormat dataset_format(const RunConfig& config, const std::string& path) {
  if (config.format.empty()) return data::format_from_extension(path);
  return data::parse_dataset_format(config.format);
}

}  // namespace dre::cli
