#include "dre/encoder/encoder.hpp"

#include <cmath>
#include <random>

namespace dre::enc {

void validate(const EncoderConfig& config) {
  if (config.num_layers < 1) throw ConfigError("encoder needs at least one layer");
  if (config.hidden_size < 1) throw ConfigError("encoder hidden size must be positive");
  if (!(config.dropout_retention > 0.0 && config.dropout_retention <= 1.0)) {
    throw ConfigError("dropout retention must lie in (0, 1]");
  }
}

std::vector<std::size_t> layer_input_widths(const EncoderConfig& config, std::size_t k) {
  std::vector<std::size_t> widths;
  const std::size_t out = 2 * config.hidden_size;
  for (std::size_t l = 1; l <= config.num_layers; ++l) {
    if (l == 1) {
      widths.push_back(k);
    } else if (config.residual) {
      widths.push_back(k + out * (l - 1));
    } else {
      widths.push_back(out);
    }
  }
  return widths;
}

std::size_t lstm_direction_param_count(std::size_t input_width, std::size_t hidden_size) {
  return 4 * (input_width * hidden_size + hidden_size * hidden_size + hidden_size);
}

std::size_t encoder_param_count(const EncoderConfig& config, std::size_t k) {
  std::size_t total = 0;
  for (std::size_t d : layer_input_widths(config, k)) {
    total += 2 * lstm_direction_param_count(d, config.hidden_size);
  }
  return total;
}

std::string lstm_param_name(std::size_t layer, Direction dir, std::string_view tensor) {
  return "enc.layer" + std::to_string(layer) + (dir == Direction::forward ? ".fwd." : ".bwd.") +
         std::string(tensor);
}

template <typename Real>
void add_encoder_parameters(ad::ParameterSet<Real>& params, const EncoderConfig& config,
                            std::size_t k, ad::Rng& rng) {
  validate(config);
  const std::size_t hidden = config.hidden_size;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto uniform = [&](std::size_t rows, std::size_t cols) {
    ad::Tensor<Real> t(ad::Shape{rows, cols});
    for (auto& v : t.data()) v = static_cast<Real>(dist(rng));
    return t;
  };

  const auto widths = layer_input_widths(config, k);
  for (std::size_t l = 1; l <= config.num_layers; ++l) {
    for (Direction dir : {Direction::forward, Direction::backward}) {
      params.add(lstm_param_name(l, dir, "w_x"), uniform(widths[l - 1], 4 * hidden));
      params.add(lstm_param_name(l, dir, "w_h"), uniform(hidden, 4 * hidden));
      ad::Tensor<Real> bias(ad::Shape{4 * hidden});
      for (std::size_t j = hidden; j < 2 * hidden; ++j) bias[j] = Real{1};
      params.add(lstm_param_name(l, dir, "b"), std::move(bias));
    }
  }
}

template <typename Real>
LstmWeights<Real> lstm_weights(ad::Graph<Real>& graph, std::size_t layer, Direction dir) {
  return {graph.parameter(lstm_param_name(layer, dir, "w_x")),
          graph.parameter(lstm_param_name(layer, dir, "w_h")),
          graph.parameter(lstm_param_name(layer, dir, "b"))};
}

template <typename Real>
LstmState<Real> lstm_cell_step_projected(ad::Graph<Real>& graph, ad::Var projected,
                                         LstmState<Real> prev, ad::Var w_h) {
  const std::size_t hidden = graph.value(w_h).rows();
  const ad::Var pre = graph.add(projected, graph.matmul(prev.h, w_h));
  const ad::Var in_gate = graph.sigmoid(graph.slice_cols(pre, 0, hidden));
  const ad::Var forget_gate = graph.sigmoid(graph.slice_cols(pre, hidden, hidden));
  const ad::Var candidate = graph.tanh(graph.slice_cols(pre, 2 * hidden, hidden));
  const ad::Var out_gate = graph.sigmoid(graph.slice_cols(pre, 3 * hidden, hidden));
  const ad::Var c = graph.add(graph.mul(forget_gate, prev.c), graph.mul(in_gate, candidate));
  const ad::Var h = graph.mul(out_gate, graph.tanh(c));
  return {h, c};
}

template <typename Real>
LstmState<Real> lstm_cell_step(ad::Graph<Real>& graph, ad::Var x, LstmState<Real> prev,
                               const LstmWeights<Real>& weights) {
  const ad::Var projected = graph.add_bias(graph.matmul(x, weights.w_x), weights.b);
  return lstm_cell_step_projected(graph, projected, prev, weights.w_h);
}

namespace {

std::size_t prefix_length(std::span<const std::uint8_t> mask) {
  std::size_t len = 0;
  while (len < mask.size() && mask[len] != 0) ++len;
  for (std::size_t t = len; t < mask.size(); ++t) {
    if (mask[t] != 0) throw ShapeError("sequence mask must select a prefix of positions");
  }
  if (len == 0) throw ShapeError("sequence mask selects no positions");
  return len;
}

template <typename Real>
ad::Var run_direction(ad::Graph<Real>& graph, ad::Var x, std::size_t length, std::size_t rows,
                      const LstmWeights<Real>& weights, bool reverse) {
  const std::size_t hidden = graph.value(weights.w_h).rows();
  const ad::Var projected = graph.add_bias(graph.matmul(x, weights.w_x), weights.b);
  const ad::Var zero = graph.input(ad::Tensor<Real>::zeros(1, hidden));
  LstmState<Real> state{zero, zero};
  std::vector<ad::Var> outputs(length);
  for (std::size_t step = 0; step < length; ++step) {
    const std::size_t t = reverse ? length - 1 - step : step;
    state = lstm_cell_step_projected(graph, graph.slice_rows(projected, t, 1), state, weights.w_h);
    outputs[t] = state.h;
  }
  return graph.stack_rows(outputs, rows);
}

}  // namespace

template <typename Real>
ad::Var bilstm_layer(ad::Graph<Real>& graph, ad::Var x, std::span<const std::uint8_t> mask,
                     const LstmWeights<Real>& forward, const LstmWeights<Real>& backward) {
  const std::size_t rows = graph.value(x).rows();
  if (mask.size() != rows) {
    throw ShapeError("bilstm: mask has " + std::to_string(mask.size()) + " entries for " +
                     std::to_string(rows) + " rows");
  }
  const std::size_t length = prefix_length(mask);
  const ad::Var fwd = run_direction(graph, x, length, rows, forward, false);
  const ad::Var bwd = run_direction(graph, x, length, rows, backward, true);
  const ad::Var both[] = {fwd, bwd};
  return graph.concat(both);
}

template <typename Real>
ad::Var layer_input(ad::Graph<Real>& graph, ad::Var embeddings, std::span<const ad::Var> previous,
                    const EncoderConfig& config) {
  if (previous.empty()) return embeddings;
  if (!config.residual) return previous.back();
  std::vector<ad::Var> parts{embeddings};
  for (std::size_t i = previous.size(); i-- > 0;) parts.push_back(previous[i]);
  return graph.concat(parts);
}

template <typename Real>
std::vector<ad::Var> encode(ad::Graph<Real>& graph, ad::Var embeddings,
                            std::span<const std::uint8_t> mask, const EncoderConfig& config,
                            ad::Rng* dropout_rng) {
  validate(config);
  const std::size_t k = graph.value(embeddings).cols();
  const auto widths = layer_input_widths(config, k);
  std::vector<ad::Var> outputs;
  outputs.reserve(config.num_layers);

  for (std::size_t l = 1; l <= config.num_layers; ++l) {
    const ad::Var input = layer_input(graph, embeddings, outputs, config);

    const auto fwd = lstm_weights(graph, l, Direction::forward);
    const auto bwd = lstm_weights(graph, l, Direction::backward);
    for (const auto* w : {&fwd, &bwd}) {
      const auto& w_x = graph.value(w->w_x);
      const auto& w_h = graph.value(w->w_h);
      const std::size_t h = config.hidden_size;
      if (w_x.rows() != widths[l - 1] || w_x.cols() != 4 * h || w_h.rows() != h ||
          w_h.cols() != 4 * h || graph.value(w->b).size() != 4 * h) {
        throw ShapeError("encoder layer " + std::to_string(l) + ": weights " +
                         ad::to_string(w_x.shape()) + " / " + ad::to_string(w_h.shape()) +
                         " do not match input width " + std::to_string(widths[l - 1]) +
                         " and hidden size " + std::to_string(h));
      }
    }

    ad::Var out = bilstm_layer(graph, input, mask, fwd, bwd);
    if (dropout_rng != nullptr) {
      out = graph.dropout(out, static_cast<Real>(config.dropout_retention), *dropout_rng);
    }
    outputs.push_back(out);
  }
  return outputs;
}

#define DRE_INSTANTIATE_ENCODER(Real)                                                         \
  template void add_encoder_parameters<Real>(ad::ParameterSet<Real>&, const EncoderConfig&,   \
                                             std::size_t, ad::Rng&);                         \
  template LstmWeights<Real> lstm_weights<Real>(ad::Graph<Real>&, std::size_t, Direction);    \
  template LstmState<Real> lstm_cell_step<Real>(ad::Graph<Real>&, ad::Var, LstmState<Real>,   \
                                                const LstmWeights<Real>&);                   \
  template LstmState<Real> lstm_cell_step_projected<Real>(ad::Graph<Real>&, ad::Var,          \
                                                          LstmState<Real>, ad::Var);         \
  template ad::Var bilstm_layer<Real>(ad::Graph<Real>&, ad::Var, std::span<const std::uint8_t>, \
                                      const LstmWeights<Real>&, const LstmWeights<Real>&);   \
  template ad::Var layer_input<Real>(ad::Graph<Real>&, ad::Var, std::span<const ad::Var>,         \
                                     const EncoderConfig&);                                  \
  template std::vector<ad::Var> encode<Real>(ad::Graph<Real>&, ad::Var,                       \
                                             std::span<const std::uint8_t>,                  \
                                             const EncoderConfig&, ad::Rng*);

DRE_INSTANTIATE_ENCODER(float)
DRE_INSTANTIATE_ENCODER(double)

#undef DRE_INSTANTIATE_ENCODER

}  // namespace dre::enc
