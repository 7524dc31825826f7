#include "dre/model/model.hpp"

#include "dre/attention/attention.hpp"
#include "dre/head/head.hpp"

namespace dre::model {

void validate(const ModelConfig& config) {
  enc::validate(config.encoder);
  if (config.embedding_dim < 1) throw ConfigError("embedding dimension must be positive");
  if (config.mode == emb::EmbeddingMode::lookup && config.vocab_size <= emb::kReservedTokens) {
    throw ConfigError("lookup mode needs a vocabulary beyond the reserved tokens");
  }
  head::validate({attention_width(config) * 2, config.head_hidden, config.num_classes});
}

std::size_t attention_width(const ModelConfig& config) {
  return attn::attention_width(config.embedding_dim, config.encoder.hidden_size,
                               config.encoder.num_layers);
}

std::vector<std::pair<std::string, ad::Shape>> expected_parameters(const ModelConfig& config) {
  std::vector<std::pair<std::string, ad::Shape>> out;
  const std::size_t k = config.embedding_dim;
  if (config.mode == emb::EmbeddingMode::lookup) {
    out.emplace_back(emb::kTokenTableName, ad::Shape{config.vocab_size, k});
    out.emplace_back(emb::kSegmentTableName, ad::Shape{emb::kSegmentCount, k});
  }
  const std::size_t h = config.encoder.hidden_size;
  const auto widths = enc::layer_input_widths(config.encoder, k);
  for (std::size_t l = 1; l <= config.encoder.num_layers; ++l) {
    for (auto dir : {enc::Direction::forward, enc::Direction::backward}) {
      out.emplace_back(enc::lstm_param_name(l, dir, "w_x"), ad::Shape{widths[l - 1], 4 * h});
      out.emplace_back(enc::lstm_param_name(l, dir, "w_h"), ad::Shape{h, 4 * h});
      out.emplace_back(enc::lstm_param_name(l, dir, "b"), ad::Shape{4 * h});
    }
  }
  const std::size_t d_att = attention_width(config);
  out.emplace_back(attn::kAttentionWeightName, ad::Shape{d_att});
  out.emplace_back(head::kHiddenWeightName, ad::Shape{2 * d_att, config.head_hidden});
  out.emplace_back(head::kHiddenBiasName, ad::Shape{config.head_hidden});
  out.emplace_back(head::kOutputWeightName, ad::Shape{config.head_hidden, config.num_classes});
  out.emplace_back(head::kOutputBiasName, ad::Shape{config.num_classes});
  return out;
}

std::size_t parameter_count(const ModelConfig& config) {
  const std::size_t k = config.embedding_dim;
  std::size_t total = 0;
  if (config.mode == emb::EmbeddingMode::lookup) {
    total += (config.vocab_size + emb::kSegmentCount) * k;
  }
  total += enc::encoder_param_count(config.encoder, k);
  const std::size_t d_att = attention_width(config);
  total += d_att;
  total += head::head_param_count({2 * d_att, config.head_hidden, config.num_classes});
  return total;
}

nlohmann::json to_json(const ModelConfig& config) {
  return {
      {"mode", std::string(emb::to_string(config.mode))},
      {"embedding_dim", config.embedding_dim},
      {"vocab_size", config.vocab_size},
      {"layers", config.encoder.num_layers},
      {"hidden", config.encoder.hidden_size},
      {"residual", config.encoder.residual},
      {"dropout_retention", config.encoder.dropout_retention},
      {"head_hidden", config.head_hidden},
      {"num_classes", config.num_classes},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.mode = emb::parse_embedding_mode(j.at("mode").get<std::string>());
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.encoder.num_layers = j.at("layers").get<std::size_t>();
    c.encoder.hidden_size = j.at("hidden").get<std::size_t>();
    c.encoder.residual = j.at("residual").get<bool>();
    c.encoder.dropout_retention = j.at("dropout_retention").get<double>();
    c.head_hidden = j.at("head_hidden").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model configuration: ") + e.what());
  }
}

template <typename Real>
DreModel<Real>::DreModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  validate(config_);
  ad::Rng rng(seed);
  if (config_.mode == emb::EmbeddingMode::lookup) {
    emb::add_lookup_parameters(params_, config_.vocab_size, config_.embedding_dim, rng);
  }
  enc::add_encoder_parameters(params_, config_.encoder, config_.embedding_dim, rng);
  attn::add_attention_parameters(params_, attention_width(config_), rng);
  head::add_head_parameters(params_, {2 * attention_width(config_), config_.head_hidden,
                                      config_.num_classes},
                            rng);
}

template <typename Real>
DreModel<Real>::DreModel(const ModelConfig& config, ad::ParameterSet<Real> params)
    : config_(config), params_(std::move(params)) {
  validate(config_);
  const auto expected = expected_parameters(config_);
  if (expected.size() != params_.size()) {
    throw FormatError("expected " + std::to_string(expected.size()) + " parameter tensors, found " +
                      std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (params_.name(i) != expected[i].first || params_[i].shape() != expected[i].second) {
      throw FormatError("parameter " + std::to_string(i) + " is '" + params_.name(i) + "' " +
                        ad::to_string(params_[i].shape()) + ", expected '" + expected[i].first +
                        "' " + ad::to_string(expected[i].second));
    }
  }
}

template <typename Real>
ForwardPass DreModel<Real>::forward(ad::Graph<Real>& graph, const emb::TokenSequence& seq,
                                    const ad::Tensor<float>* contextual,
                                    ad::Rng* dropout_rng) const {
  ForwardPass pass;
  if (config_.mode == emb::EmbeddingMode::lookup) {
    pass.embeddings = emb::embed_lookup(graph, seq);
  } else {
    if (contextual == nullptr) throw ConfigError("contextual mode needs a stored embedding matrix");
    if (contextual->cols() != config_.embedding_dim) {
      throw ConfigError("stored embeddings have dimension " + std::to_string(contextual->cols()) +
                        ", model expects " + std::to_string(config_.embedding_dim));
    }
    pass.embeddings = emb::embed_contextual(graph, *contextual, seq);
  }
  pass.layers = enc::encode(graph, pass.embeddings, seq.mask, config_.encoder, dropout_rng);
  pass.attention_input = attn::assemble_attention_input(graph, pass.embeddings, pass.layers);
  pass.attention = attn::attention_weights(graph, pass.attention_input,
                                           graph.parameter(attn::kAttentionWeightName), seq.mask);
  pass.weighted = attn::apply_attention(graph, pass.attention_input, pass.attention);
  pass.pooled = attn::pool(graph, pass.weighted, seq.mask);
  pass.logits = head::logits(graph, pass.pooled);
  return pass;
}

template <typename Real>
std::vector<Real> DreModel<Real>::predict(const emb::TokenSequence& seq,
                                          const ad::Tensor<float>* contextual) const {
  ad::Graph<Real> graph(&params_);
  const ForwardPass pass = forward(graph, seq, contextual, nullptr);
  const auto& probs = graph.value(head::predict(graph, pass.logits));
  return std::vector<Real>(probs.data().begin(), probs.data().end());
}

template class DreModel<float>;
template class DreModel<double>;

}  // namespace dre::model
