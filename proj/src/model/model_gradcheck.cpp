#include "dre/model/model_gradcheck.hpp"

#include <random>

#include "dre/error.hpp"
#include "dre/head/head.hpp"

namespace dre::model {

GradCheckSetup gradcheck_setup(std::string_view dims, std::uint64_t seed) {
  GradCheckSetup s;
  s.seed = seed;
  s.config.mode = emb::EmbeddingMode::lookup;
  s.config.encoder.num_layers = 3;
  s.config.encoder.residual = true;
  s.config.num_classes = 3;
  if (dims == "tiny") {
    s.config.embedding_dim = 8;
    s.config.encoder.hidden_size = 4;
    s.config.head_hidden = 8;
    s.config.vocab_size = 10;
    s.sequence_length = 3;
  } else if (dims == "small") {
    s.config.embedding_dim = 16;
    s.config.encoder.hidden_size = 8;
    s.config.head_hidden = 16;
    s.config.vocab_size = 20;
    s.sequence_length = 6;
    s.options.max_coords_per_param = 64;
  } else {
    throw ConfigError("unknown gradcheck dims '" + std::string(dims) + "' (expected tiny or small)");
  }
  s.options.seed = seed;
  return s;
}

ad::GradCheckResult model_gradcheck(const GradCheckSetup& setup) {
  DreModel<double> model(setup.config, setup.seed);

  ad::Rng rng(setup.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> token(emb::kReservedTokens,
                                                   setup.config.vocab_size - 1);
  std::uniform_int_distribution<std::size_t> label(0, setup.config.num_classes - 1);
  const std::size_t t_len = setup.sequence_length;
  emb::TokenSequence seq = emb::dense_sequence(t_len, t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    seq.token_ids[t] = token(rng);
    seq.segment_ids[t] = 2 * t < t_len ? 0 : 1;
  }
  const std::size_t target = label(rng);

  auto build = [&](ad::Graph<double>& graph) {
    const auto pass = model.forward(graph, seq, nullptr, nullptr);
    return head::loss(graph, pass.logits, target);
  };
  return ad::grad_check(build, model.parameters(), setup.options);
}

}  // namespace dre::model
