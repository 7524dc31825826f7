#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dre/autodiff/kernels.hpp"
#include "dre/autodiff/parameters.hpp"
#include "dre/autodiff/tensor.hpp"

namespace dre::ad {

// One byte per position, nonzero = real token.
using Mask = std::vector<std::uint8_t>;

using Rng = std::mt19937_64;

// Handle to a node inside a Graph.
struct Var {
  std::uint32_t id = 0;
};

// The fixed primitive set. Everything the model computes is a composition
// of these; structural ops (slices, stacking, gathers, reshape) only move
// values around.
enum class Op : std::uint8_t {
  input,
  parameter,
  matmul,
  add,
  mul,
  add_bias,
  concat,
  tanh,
  sigmoid,
  scale,
  masked_softmax,
  dropout,
  masked_max,
  masked_mean,
  softmax_cross_entropy,
  slice_cols,
  slice_rows,
  stack_rows,
  gather_rows,
  reshape,
};

std::string_view op_name(Op op);

// Thrown when an op receives operands of incompatible shapes.
class GraphShapeError : public ShapeError {
 public:
  GraphShapeError(Op op, std::size_t node, Shape lhs, Shape rhs, const std::string& detail);

  Op op() const { return op_; }
  std::size_t node() const { return node_; }
  const Shape& lhs() const { return lhs_; }
  const Shape& rhs() const { return rhs_; }

 private:
  Op op_;
  std::size_t node_;
  Shape lhs_;
  Shape rhs_;
};

// Value used for masked logits before normalization.
inline constexpr double kMaskedLogit = -1e9;

// Define-by-run tape. Each op computes its value immediately and appends a
// node, so node order is a topological order; backward() walks it in
// reverse. A graph is single-use and single-threaded; parameters are read
// through a const ParameterSet, so many graphs may share one set.
template <typename Real>
class Graph {
 public:
  explicit Graph(const ParameterSet<Real>* params = nullptr,
                 kernels::Exec exec = kernels::Exec::parallel);

  // Constant leaf. Its gradient is still readable through grad() after
  // backward().
  Var input(Tensor<Real> value);
  // Leaf bound to params[index]; repeated calls return the same node.
  Var parameter(std::size_t index);
  Var parameter(std::string_view name);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // Same-shape product, or b of shape (rows x 1) broadcast across columns.
  Var mul(Var a, Var b);
  Var add_bias(Var x, Var bias);
  Var concat(std::span<const Var> parts);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var scale(Var x, Real factor);
  // Softmax over all entries of x; masked entries get probability 0.
  Var masked_softmax(Var x, std::span<const std::uint8_t> mask);
  // Inverted dropout: keeps each value with probability `retention`.
  Var dropout(Var x, Real retention, Rng& rng);
  // Column-wise max / mean over the rows selected by mask, giving 1 x cols.
  Var masked_max(Var x, std::span<const std::uint8_t> mask);
  Var masked_mean(Var x, std::span<const std::uint8_t> mask);
  // Fused, numerically stable -log softmax(logits)[label]; scalar output.
  Var softmax_cross_entropy(Var logits, std::size_t label);

  Var slice_cols(Var x, std::size_t begin, std::size_t count);
  Var slice_rows(Var x, std::size_t begin, std::size_t count);
  // Stacks row blocks vertically and zero-pads to total_rows.
  Var stack_rows(std::span<const Var> rows, std::size_t total_rows);
  // Row t = table[ids[t]] where mask[t] is set, zeros elsewhere.
  Var gather_rows(Var table, std::span<const std::size_t> ids,
                  std::span<const std::uint8_t> mask);
  Var reshape(Var x, Shape shape);

  const Tensor<Real>& value(Var v) const;
  // Empty until backward() reached the node.
  std::span<const Real> grad(Var v) const { return nodes_[v.id].grad; }
  Op op(Var v) const { return nodes_[v.id].op; }
  std::span<const std::uint32_t> inputs(Var v) const { return nodes_[v.id].inputs; }
  std::size_t size() const { return nodes_.size(); }

  // Selected row of every masked_max column, in node order. Two graphs
  // with the same signature lie on the same differentiable piece.
  std::vector<std::size_t> branch_signature() const;

  // Reverse pass from a scalar node. Resets earlier gradients.
  void backward(Var loss);
  void accumulate_parameter_grads(GradientSet<Real>& out) const;
  void accumulate_parameter_grads(ParameterSet<Real>& params) const;

 private:
  struct Node {
    Op op;
    std::vector<std::uint32_t> inputs{};
    Tensor<Real> value{};
    const Tensor<Real>* bound = nullptr;
    std::vector<Real> grad{};
    std::vector<Real> aux{};
    std::vector<std::size_t> index{};
    std::size_t param = 0;
    std::size_t offset = 0;
  };

  Var push(Node node);
  std::vector<Real>& ensure_grad(std::uint32_t id);
  [[noreturn]] void shape_error(Op op, Var a, Var b, const std::string& detail) const;
  void backward_node(std::size_t id);

  const ParameterSet<Real>* params_;
  kernels::Exec exec_;
  std::vector<Node> nodes_;
  std::vector<std::int64_t> param_nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace dre::ad
