#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "dre/autodiff/graph.hpp"
#include "dre/embedding/embedding.hpp"
#include "dre/embedding/sequence.hpp"
#include "dre/encoder/encoder.hpp"

namespace dre::model {

struct ModelConfig {
  emb::EmbeddingMode mode = emb::EmbeddingMode::lookup;
  std::size_t embedding_dim = 128;
  // Lookup mode only.
  std::size_t vocab_size = 0;
  enc::EncoderConfig encoder;
  std::size_t head_hidden = 256;
  std::size_t num_classes = 2;

  bool operator==(const ModelConfig&) const = default;
};

void validate(const ModelConfig& config);
std::size_t attention_width(const ModelConfig& config);
// Closed-form count over every tensor the model creates.
std::size_t parameter_count(const ModelConfig& config);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Handles to the intermediate values of one example's forward pass.
struct ForwardPass {
  ad::Var embeddings;
  std::vector<ad::Var> layers;
  ad::Var attention_input;
  ad::Var attention;
  ad::Var weighted;
  ad::Var pooled;
  ad::Var logits;
};

// Embeddings -> dense Bi-LSTM stack -> attention -> max/mean pooling ->
// two-layer classifier.
template <typename Real>
class DreModel {
 public:
  // Fresh parameters; every initializer draws from one generator seeded
  // with `seed`, in parameter order.
  DreModel(const ModelConfig& config, std::uint64_t seed);
  // Restored parameters. Throws FormatError when names or shapes differ
  // from what the configuration implies.
  DreModel(const ModelConfig& config, ad::ParameterSet<Real> params);

  const ModelConfig& config() const { return config_; }
  ad::ParameterSet<Real>& parameters() { return params_; }
  const ad::ParameterSet<Real>& parameters() const { return params_; }

  // `contextual` is required in contextual mode and ignored otherwise.
  // Dropout is active only when dropout_rng is non-null.
  ForwardPass forward(ad::Graph<Real>& graph, const emb::TokenSequence& seq,
                      const ad::Tensor<float>* contextual, ad::Rng* dropout_rng) const;

  // Class probabilities with dropout disabled.
  std::vector<Real> predict(const emb::TokenSequence& seq,
                            const ad::Tensor<float>* contextual = nullptr) const;

 private:
  ModelConfig config_;
  ad::ParameterSet<Real> params_;
};

// Parameters a configuration creates, without any values.
std::vector<std::pair<std::string, ad::Shape>> expected_parameters(const ModelConfig& config);

extern template class DreModel<float>;
extern template class DreModel<double>;

}  // namespace dre::model
