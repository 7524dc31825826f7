#include "dre/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dre::ad {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::parameter: return "parameter";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::mul: return "mul";
    case Op::add_bias: return "add_bias";
    case Op::concat: return "concat";
    case Op::tanh: return "tanh";
    case Op::sigmoid: return "sigmoid";
    case Op::scale: return "scale";
    case Op::masked_softmax: return "masked_softmax";
    case Op::dropout: return "dropout";
    case Op::masked_max: return "masked_max";
    case Op::masked_mean: return "masked_mean";
    case Op::softmax_cross_entropy: return "softmax_cross_entropy";
    case Op::slice_cols: return "slice_cols";
    case Op::slice_rows: return "slice_rows";
    case Op::stack_rows: return "stack_rows";
    case Op::gather_rows: return "gather_rows";
    case Op::reshape: return "reshape";
  }
  return "unknown";
}

GraphShapeError::GraphShapeError(Op op, std::size_t node, Shape lhs, Shape rhs,
                                 const std::string& detail)
    : ShapeError(std::string(op_name(op)) + " (node " + std::to_string(node) + "): " + detail +
                 ": " + to_string(lhs) + " vs " + to_string(rhs)),
      op_(op),
      node_(node),
      lhs_(std::move(lhs)),
      rhs_(std::move(rhs)) {}

namespace {

template <typename Real>
Real stable_sigmoid(Real x) {
  if (x >= Real{0}) return Real{1} / (Real{1} + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real{1} + e);
}

bool masked_on(std::span<const std::uint8_t> mask, std::size_t i) {
  return mask.empty() || mask[i] != 0;
}

}  // namespace

template <typename Real>
Graph<Real>::Graph(const ParameterSet<Real>* params, kernels::Exec exec)
    : params_(params), exec_(exec) {
  if (params_ != nullptr) param_nodes_.assign(params_->size(), -1);
}

template <typename Real>
Var Graph<Real>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
const Tensor<Real>& Graph<Real>::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.bound != nullptr ? *n.bound : n.value;
}

template <typename Real>
void Graph<Real>::shape_error(Op op, Var a, Var b, const std::string& detail) const {
  throw GraphShapeError(op, nodes_.size(), value(a).shape(), value(b).shape(), detail);
}

template <typename Real>
std::vector<Real>& Graph<Real>::ensure_grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(value(Var{id}).size(), Real{0});
  return n.grad;
}

template <typename Real>
Var Graph<Real>::input(Tensor<Real> value) {
  Node n{Op::input, {}, std::move(value)};
  n.value.set_requires_grad(false);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::parameter(std::size_t index) {
  if (params_ == nullptr || index >= params_->size()) {
    throw ConfigError("graph has no parameter with index " + std::to_string(index));
  }
  if (param_nodes_[index] >= 0) return Var{static_cast<std::uint32_t>(param_nodes_[index])};
  Node n{Op::parameter};
  n.bound = &(*params_)[index];
  n.param = index;
  Var v = push(std::move(n));
  param_nodes_[index] = v.id;
  return v;
}

template <typename Real>
Var Graph<Real>::parameter(std::string_view name) {
  if (params_ == nullptr) throw ConfigError("graph has no parameter set");
  return parameter(params_->index_of(name));
}

template <typename Real>
Var Graph<Real>::matmul(Var a, Var b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (av.cols() != bv.rows()) shape_error(Op::matmul, a, b, "inner dimensions differ");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor<Real> out(Shape{m, n});
  kernels::matmul<Real>(av.data(), bv.data(), out.data(), m, k, n, exec_);
  return push(Node{Op::matmul, {a.id, b.id}, std::move(out)});
}

template <typename Real>
Var Graph<Real>::add(Var a, Var b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    shape_error(Op::add, a, b, "operands differ in shape");
  }
  Tensor<Real> out = av.reshaped(av.shape());
  auto o = out.data();
  auto bd = bv.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return push(Node{Op::add, {a.id, b.id}, std::move(out)});
}

template <typename Real>
Var Graph<Real>::mul(Var a, Var b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  const bool same = av.rows() == bv.rows() && av.cols() == bv.cols();
  const bool column = !same && bv.cols() == 1 && bv.rows() == av.rows();
  if (!same && !column) shape_error(Op::mul, a, b, "operands neither match nor broadcast");
  Tensor<Real> out = av.reshaped(av.shape());
  auto o = out.data();
  auto bd = bv.data();
  if (same) {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  } else {
    const std::size_t cols = av.cols();
    for (std::size_t r = 0; r < av.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) o[r * cols + c] *= bd[r];
    }
  }
  Node n{Op::mul, {a.id, b.id}, std::move(out)};
  n.offset = column ? 1 : 0;
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::add_bias(Var x, Var bias) {
  const auto& xv = value(x);
  const auto& bv = value(bias);
  if (bv.size() != xv.cols()) shape_error(Op::add_bias, x, bias, "bias length differs from columns");
  Tensor<Real> out = xv.reshaped(xv.shape());
  auto o = out.data();
  auto bd = bv.data();
  const std::size_t cols = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) o[r * cols + c] += bd[c];
  }
  return push(Node{Op::add_bias, {x.id, bias.id}, std::move(out)});
}

template <typename Real>
Var Graph<Real>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat (node " + std::to_string(nodes_.size()) + "): no operands");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows) shape_error(Op::concat, parts[0], p, "row counts differ");
    cols += value(p).cols();
  }
  Tensor<Real> out(Shape{rows, cols});
  Node n{Op::concat};
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto& pv = value(p);
    const std::size_t pc = pv.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data().begin() + r * pc, pc, out.data().begin() + r * cols + offset);
    }
    offset += pc;
    n.inputs.push_back(p.id);
  }
  n.value = std::move(out);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::tanh(Var x) {
  Tensor<Real> out = value(x).reshaped(value(x).shape());
  for (auto& v : out.data()) v = std::tanh(v);
  return push(Node{Op::tanh, {x.id}, std::move(out)});
}

template <typename Real>
Var Graph<Real>::sigmoid(Var x) {
  Tensor<Real> out = value(x).reshaped(value(x).shape());
  for (auto& v : out.data()) v = stable_sigmoid(v);
  return push(Node{Op::sigmoid, {x.id}, std::move(out)});
}

template <typename Real>
Var Graph<Real>::scale(Var x, Real factor) {
  Tensor<Real> out = value(x).reshaped(value(x).shape());
  for (auto& v : out.data()) v *= factor;
  Node n{Op::scale, {x.id}, std::move(out)};
  n.aux = {factor};
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::masked_softmax(Var x, std::span<const std::uint8_t> mask) {
  const auto& xv = value(x);
  if (!mask.empty() && mask.size() != xv.size()) {
    throw GraphShapeError(Op::masked_softmax, nodes_.size(), xv.shape(), Shape{mask.size()},
                          "mask length differs from element count");
  }
  const auto xd = xv.data();
  std::vector<Real> z(xd.size());
  bool any = false;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool on = masked_on(mask, i);
    any = any || on;
    z[i] = on ? xd[i] : static_cast<Real>(kMaskedLogit);
  }
  if (!any) throw ShapeError("masked_softmax (node " + std::to_string(nodes_.size()) + "): every position is masked");
  const Real m = *std::max_element(z.begin(), z.end());
  Real sum{0};
  for (auto& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return push(Node{Op::masked_softmax, {x.id}, Tensor<Real>(xv.shape(), std::move(z))});
}

template <typename Real>
Var Graph<Real>::dropout(Var x, Real retention, Rng& rng) {
  if (!(retention > Real{0} && retention <= Real{1})) {
    throw ConfigError("dropout retention must lie in (0, 1], got " + std::to_string(retention));
  }
  if (retention == Real{1}) return x;
  const auto& xv = value(x);
  std::bernoulli_distribution keep(static_cast<double>(retention));
  const Real inv = Real{1} / retention;
  std::vector<Real> factors(xv.size());
  for (auto& f : factors) f = keep(rng) ? inv : Real{0};
  Tensor<Real> out = xv.reshaped(xv.shape());
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= factors[i];
  Node n{Op::dropout, {x.id}, std::move(out)};
  n.aux = std::move(factors);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::masked_max(Var x, std::span<const std::uint8_t> mask) {
  const auto& xv = value(x);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (!mask.empty() && mask.size() != rows) {
    throw GraphShapeError(Op::masked_max, nodes_.size(), xv.shape(), Shape{mask.size()},
                          "mask length differs from row count");
  }
  Tensor<Real> out(Shape{1, cols});
  std::vector<std::size_t> argmax(cols, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!masked_on(mask, r)) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      const Real v = xv.at(r, c);
      if (argmax[c] == rows || v > out[c]) {
        out[c] = v;
        argmax[c] = r;
      }
    }
  }
  if (cols > 0 && argmax[0] == rows) {
    throw ShapeError("masked_max (node " + std::to_string(nodes_.size()) + "): every row is masked");
  }
  Node n{Op::masked_max, {x.id}, std::move(out)};
  n.index = std::move(argmax);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::masked_mean(Var x, std::span<const std::uint8_t> mask) {
  const auto& xv = value(x);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (!mask.empty() && mask.size() != rows) {
    throw GraphShapeError(Op::masked_mean, nodes_.size(), xv.shape(), Shape{mask.size()},
                          "mask length differs from row count");
  }
  Tensor<Real> out(Shape{1, cols});
  std::vector<std::size_t> selected;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!masked_on(mask, r)) continue;
    selected.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) out[c] += xv.at(r, c);
  }
  if (selected.empty()) {
    throw ShapeError("masked_mean (node " + std::to_string(nodes_.size()) + "): every row is masked");
  }
  const Real count = static_cast<Real>(selected.size());
  for (auto& v : out.data()) v /= count;
  Node n{Op::masked_mean, {x.id}, std::move(out)};
  n.index = std::move(selected);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::softmax_cross_entropy(Var logits, std::size_t label) {
  const auto& lv = value(logits);
  const auto z = lv.data();
  if (label >= z.size()) {
    throw ConfigError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(z.size()) + " classes");
  }
  const Real m = *std::max_element(z.begin(), z.end());
  std::vector<Real> probs(z.size());
  Real sum{0};
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - m);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
  const Real loss = m + std::log(sum) - z[label];
  Node n{Op::softmax_cross_entropy, {logits.id}, Tensor<Real>(Shape{1}, std::vector<Real>{loss})};
  n.aux = std::move(probs);
  n.offset = label;
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::slice_cols(Var x, std::size_t begin, std::size_t count) {
  const auto& xv = value(x);
  if (count == 0 || begin + count > xv.cols()) {
    throw GraphShapeError(Op::slice_cols, nodes_.size(), xv.shape(), Shape{begin, count},
                          "column range out of bounds");
  }
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor<Real> out(Shape{rows, count});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data().begin() + r * cols + begin, count, out.data().begin() + r * count);
  }
  Node n{Op::slice_cols, {x.id}, std::move(out)};
  n.offset = begin;
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::slice_rows(Var x, std::size_t begin, std::size_t count) {
  const auto& xv = value(x);
  if (count == 0 || begin + count > xv.rows()) {
    throw GraphShapeError(Op::slice_rows, nodes_.size(), xv.shape(), Shape{begin, count},
                          "row range out of bounds");
  }
  const std::size_t cols = xv.cols();
  std::vector<Real> data(xv.data().begin() + begin * cols,
                         xv.data().begin() + (begin + count) * cols);
  Node n{Op::slice_rows, {x.id}, Tensor<Real>(Shape{count, cols}, std::move(data))};
  n.offset = begin;
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::stack_rows(std::span<const Var> rows, std::size_t total_rows) {
  if (rows.empty()) throw ShapeError("stack_rows (node " + std::to_string(nodes_.size()) + "): no operands");
  const std::size_t cols = value(rows[0]).cols();
  std::size_t used = 0;
  for (Var r : rows) {
    if (value(r).cols() != cols) shape_error(Op::stack_rows, rows[0], r, "column counts differ");
    used += value(r).rows();
  }
  if (used > total_rows) {
    throw GraphShapeError(Op::stack_rows, nodes_.size(), Shape{used, cols},
                          Shape{total_rows, cols}, "stacked rows exceed the target");
  }
  Tensor<Real> out(Shape{total_rows, cols});
  Node n{Op::stack_rows};
  std::size_t offset = 0;
  for (Var r : rows) {
    const auto& rv = value(r);
    std::copy(rv.data().begin(), rv.data().end(), out.data().begin() + offset);
    offset += rv.size();
    n.inputs.push_back(r.id);
  }
  n.value = std::move(out);
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::gather_rows(Var table, std::span<const std::size_t> ids,
                             std::span<const std::uint8_t> mask) {
  const auto& tv = value(table);
  if (ids.empty() || (!mask.empty() && mask.size() != ids.size())) {
    throw GraphShapeError(Op::gather_rows, nodes_.size(), Shape{ids.size()}, Shape{mask.size()},
                          "ids and mask lengths differ");
  }
  const std::size_t cols = tv.cols();
  Tensor<Real> out(Shape{ids.size(), cols});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (!masked_on(mask, t)) continue;
    if (ids[t] >= tv.rows()) {
      throw GraphShapeError(Op::gather_rows, nodes_.size(), tv.shape(), Shape{ids[t]},
                            "row id out of range");
    }
    std::copy_n(tv.data().begin() + ids[t] * cols, cols, out.data().begin() + t * cols);
  }
  Node n{Op::gather_rows, {table.id}, std::move(out)};
  n.index.assign(ids.begin(), ids.end());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (!masked_on(mask, t)) n.index[t] = tv.rows();
  }
  return push(std::move(n));
}

template <typename Real>
Var Graph<Real>::reshape(Var x, Shape shape) {
  const auto& xv = value(x);
  if (numel(shape) != xv.size()) {
    throw GraphShapeError(Op::reshape, nodes_.size(), xv.shape(), shape, "element counts differ");
  }
  return push(Node{Op::reshape, {x.id}, xv.reshaped(std::move(shape))});
}

template <typename Real>
void Graph<Real>::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + to_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.grad.clear();
  ensure_grad(loss.id)[0] = Real{1};
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (!nodes_[i].grad.empty()) backward_node(i);
  }
}

template <typename Real>
void Graph<Real>::backward_node(std::size_t id) {
  // ensure_grad only touches inputs, which precede this node, so these
  // references stay valid.
  const Node& n = nodes_[id];
  const std::vector<Real>& g = n.grad;
  switch (n.op) {
    case Op::input:
    case Op::parameter:
      break;
    case Op::matmul: {
      const auto& av = value(Var{n.inputs[0]});
      const auto& bv = value(Var{n.inputs[1]});
      const std::size_t m = av.rows(), k = av.cols(), cols = bv.cols();
      auto& ga = ensure_grad(n.inputs[0]);
      kernels::matmul_nt<Real>(g, bv.data(), ga, m, k, cols, exec_);
      auto& gb = ensure_grad(n.inputs[1]);
      kernels::matmul_tn<Real>(av.data(), g, gb, m, k, cols, exec_);
      break;
    }
    case Op::add: {
      for (std::uint32_t in : n.inputs) {
        auto& gi = ensure_grad(in);
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
      break;
    }
    case Op::mul: {
      const auto& av = value(Var{n.inputs[0]});
      const auto& bv = value(Var{n.inputs[1]});
      const auto ad = av.data();
      const auto bd = bv.data();
      if (n.offset == 0) {
        auto& ga = ensure_grad(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
        auto& gb = ensure_grad(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
      } else {
        const std::size_t cols = av.cols();
        auto& ga = ensure_grad(n.inputs[0]);
        for (std::size_t r = 0; r < av.rows(); ++r) {
          for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r * cols + c] * bd[r];
        }
        auto& gb = ensure_grad(n.inputs[1]);
        for (std::size_t r = 0; r < av.rows(); ++r) {
          Real acc{0};
          for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * ad[r * cols + c];
          gb[r] += acc;
        }
      }
      break;
    }
    case Op::add_bias: {
      auto& gx = ensure_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      auto& gb = ensure_grad(n.inputs[1]);
      const std::size_t cols = gb.size();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += g[i];
      break;
    }
    case Op::concat: {
      const std::size_t rows = n.value.rows(), cols = n.value.cols();
      std::size_t offset = 0;
      for (std::uint32_t in : n.inputs) {
        const std::size_t pc = value(Var{in}).cols();
        auto& gi = ensure_grad(in);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < pc; ++c) gi[r * pc + c] += g[r * cols + offset + c];
        }
        offset += pc;
      }
      break;
    }
    case Op::tanh: {
      auto& gx = ensure_grad(n.inputs[0]);
      const auto y = n.value.data();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (Real{1} - y[i] * y[i]);
      break;
    }
    case Op::sigmoid: {
      auto& gx = ensure_grad(n.inputs[0]);
      const auto y = n.value.data();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (Real{1} - y[i]);
      break;
    }
    case Op::scale: {
      auto& gx = ensure_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux[0];
      break;
    }
    case Op::masked_softmax: {
      auto& gx = ensure_grad(n.inputs[0]);
      const auto p = n.value.data();
      Real dot{0};
      for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * p[i];
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += p[i] * (g[i] - dot);
      break;
    }
    case Op::dropout: {
      auto& gx = ensure_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux[i];
      break;
    }
    case Op::masked_max: {
      auto& gx = ensure_grad(n.inputs[0]);
      const std::size_t cols = n.value.cols();
      for (std::size_t c = 0; c < cols; ++c) gx[n.index[c] * cols + c] += g[c];
      break;
    }
    case Op::masked_mean: {
      auto& gx = ensure_grad(n.inputs[0]);
      const std::size_t cols = n.value.cols();
      const Real count = static_cast<Real>(n.index.size());
      for (std::size_t r : n.index) {
        for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[c] / count;
      }
      break;
    }
    case Op::softmax_cross_entropy: {
      auto& gx = ensure_grad(n.inputs[0]);
      for (std::size_t i = 0; i < n.aux.size(); ++i) {
        const Real target = i == n.offset ? Real{1} : Real{0};
        gx[i] += g[0] * (n.aux[i] - target);
      }
      break;
    }
    case Op::slice_cols: {
      auto& gx = ensure_grad(n.inputs[0]);
      const std::size_t src_cols = value(Var{n.inputs[0]}).cols();
      const std::size_t rows = n.value.rows(), cols = n.value.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gx[r * src_cols + n.offset + c] += g[r * cols + c];
      }
      break;
    }
    case Op::slice_rows: {
      auto& gx = ensure_grad(n.inputs[0]);
      const std::size_t start = n.offset * n.value.cols();
      for (std::size_t i = 0; i < g.size(); ++i) gx[start + i] += g[i];
      break;
    }
    case Op::stack_rows: {
      std::size_t offset = 0;
      for (std::uint32_t in : n.inputs) {
        auto& gi = ensure_grad(in);
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[offset + i];
        offset += gi.size();
      }
      break;
    }
    case Op::gather_rows: {
      auto& gt = ensure_grad(n.inputs[0]);
      const auto& tv = value(Var{n.inputs[0]});
      const std::size_t cols = tv.cols();
      for (std::size_t t = 0; t < n.index.size(); ++t) {
        if (n.index[t] >= tv.rows()) continue;
        for (std::size_t c = 0; c < cols; ++c) gt[n.index[t] * cols + c] += g[t * cols + c];
      }
      break;
    }
    case Op::reshape: {
      auto& gx = ensure_grad(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      break;
    }
  }
}

template <typename Real>
std::vector<std::size_t> Graph<Real>::branch_signature() const {
  std::vector<std::size_t> sig;
  for (const auto& n : nodes_) {
    if (n.op == Op::masked_max) sig.insert(sig.end(), n.index.begin(), n.index.end());
  }
  return sig;
}

template <typename Real>
void Graph<Real>::accumulate_parameter_grads(GradientSet<Real>& out) const {
  for (std::size_t p = 0; p < param_nodes_.size(); ++p) {
    if (param_nodes_[p] < 0) continue;
    const auto& g = nodes_[param_nodes_[p]].grad;
    if (g.empty()) continue;
    auto dst = out[p];
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

template <typename Real>
void Graph<Real>::accumulate_parameter_grads(ParameterSet<Real>& params) const {
  for (std::size_t p = 0; p < param_nodes_.size(); ++p) {
    if (param_nodes_[p] < 0) continue;
    const auto& g = nodes_[param_nodes_[p]].grad;
    if (g.empty()) continue;
    auto dst = params[p].grad();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace dre::ad
