#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dre/autodiff/graph.hpp"

// Densely connected bidirectional LSTM stack.
//
// Layer l reads the token embeddings concatenated with the outputs of every
// earlier layer, most recent first:
//
//   layer 1: x_t = emb_t
//   layer 2: x_t = [emb_t; H1_t]
//   layer 3: x_t = [emb_t; H2_t; H1_t]
//   layer l: x_t = [emb_t; H(l-1)_t; ...; H1_t]
//
// With residual wiring off, layer l > 1 reads H(l-1)_t alone. Each layer
// output H_t = [forward h_t; backward h_t] has width 2H.
namespace dre::enc {

struct EncoderConfig {
  std::size_t num_layers = 3;
  std::size_t hidden_size = 128;
  bool residual = true;
  double dropout_retention = 0.5;

  bool operator==(const EncoderConfig&) const = default;
};

// Throws ConfigError when a field is out of range.
void validate(const EncoderConfig& config);

// Input width of every layer for embedding width k.
std::vector<std::size_t> layer_input_widths(const EncoderConfig& config, std::size_t k);

// 4 * (d*H + H*H + H): one direction's w_x, w_h and gate bias.
std::size_t lstm_direction_param_count(std::size_t input_width, std::size_t hidden_size);
std::size_t encoder_param_count(const EncoderConfig& config, std::size_t k);

enum class Direction { forward, backward };

// "enc.layer{l}.{fwd|bwd}.{w_x|w_h|b}", layers counted from 1.
std::string lstm_param_name(std::size_t layer, Direction dir, std::string_view tensor);

// Gate columns are ordered [input, forget, candidate, output].
template <typename Real>
struct LstmWeights {
  ad::Var w_x;  // d x 4H
  ad::Var w_h;  // H x 4H
  ad::Var b;    // 4H
};

template <typename Real>
struct LstmState {
  ad::Var h;  // 1 x H
  ad::Var c;  // 1 x H
};

// Gate weights uniform(-1/sqrt(H), 1/sqrt(H)); forget-gate bias 1, other
// biases 0. Parameters are added layer by layer, forward then backward.
template <typename Real>
void add_encoder_parameters(ad::ParameterSet<Real>& params, const EncoderConfig& config,
                            std::size_t k, ad::Rng& rng);

template <typename Real>
LstmWeights<Real> lstm_weights(ad::Graph<Real>& graph, std::size_t layer, Direction dir);

// One LSTM step for a 1 x d input row:
//   i, f, o = sigmoid(.), g = tanh(.), c = f*c_prev + i*g, h = o*tanh(c)
template <typename Real>
LstmState<Real> lstm_cell_step(ad::Graph<Real>& graph, ad::Var x, LstmState<Real> prev,
                               const LstmWeights<Real>& weights);

// Same step when the input projection x*w_x + b is already computed.
template <typename Real>
LstmState<Real> lstm_cell_step_projected(ad::Graph<Real>& graph, ad::Var projected,
                                         LstmState<Real> prev, ad::Var w_h);

// Bidirectional pass over the real prefix selected by mask. Both directions
// start from zero state; the backward one starts at the last real token.
// Padded rows of the T x 2H output are zero.
template <typename Real>
ad::Var bilstm_layer(ad::Graph<Real>& graph, ad::Var x, std::span<const std::uint8_t> mask,
                     const LstmWeights<Real>& forward, const LstmWeights<Real>& backward);

// Input to the next layer given the outputs so far (oldest first):
// [emb; newest; ...; oldest] with residual wiring, else the newest output
// alone. With no previous outputs this is emb.
template <typename Real>
ad::Var layer_input(ad::Graph<Real>& graph, ad::Var embeddings, std::span<const ad::Var> previous,
                    const EncoderConfig& config);

// Runs the whole stack and returns every layer's (post-dropout) output.
// Dropout runs only when dropout_rng is non-null. Throws ShapeError naming
// the layer when stored weights disagree with the configuration.
template <typename Real>
std::vector<ad::Var> encode(ad::Graph<Real>& graph, ad::Var embeddings,
                            std::span<const std::uint8_t> mask, const EncoderConfig& config,
                            ad::Rng* dropout_rng);

}  // namespace dre::enc
