#include "dre/train/matcher.hpp"

#include "dre/error.hpp"
#include "dre/model/checkpoint.hpp"

namespace dre::train {

nlohmann::json checkpoint_config(const Matcher& matcher) {
  return {{"model", model::to_json(matcher.config())},
          {"labels", matcher.labels},
          {"max_len", matcher.max_len},
          {"vocabulary", matcher.vocab.tokens()},
          {"vocab_min_frequency", matcher.vocab.min_frequency()},
          {"train", matcher.metadata}};
}

void save_matcher(const std::filesystem::path& path, const Matcher& matcher) {
  model::save_checkpoint(path, checkpoint_config(matcher), matcher.model.parameters());
}

Matcher load_matcher(const std::filesystem::path& path) {
  auto contents = model::load_checkpoint<float>(path);
  const auto& j = contents.config;
  try {
    const auto config = model::model_config_from_json(j.at("model"));
    auto vocab = emb::Vocabulary::from_tokens(j.at("vocabulary").get<std::vector<std::string>>(),
                                              j.at("vocab_min_frequency").get<std::size_t>());
    auto labels = j.at("labels").get<std::vector<std::string>>();
    if (labels.size() != config.num_classes) {
      throw FormatError("checkpoint lists " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(config.num_classes) + " classes");
    }
    if (config.mode == emb::EmbeddingMode::lookup && vocab.size() != config.vocab_size) {
      throw FormatError("checkpoint vocabulary has " + std::to_string(vocab.size()) +
                        " tokens, model expects " + std::to_string(config.vocab_size));
    }
    return Matcher{std::move(vocab), std::move(labels), j.at("max_len").get<std::size_t>(),
                   model::DreModel<float>(config, std::move(contents.params)),
                   j.value("train", nlohmann::json::object())};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint '" + path.string() + "': " + e.what());
  }
}

}  // namespace dre::train
