#include "msmr/numeric/tape.hpp"

#include <algorithm>

#include "msmr/error.hpp"

namespace msmr::numeric {

const Tensor& Var::value() const {
  if (!tape) throw Error("unbound variable");
  return tape->value(*this);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}, nullptr});
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back(Node{p.tensor.reshaped(p.tensor.shape()), {}, true, {}, &p});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw Error("operation mixes variables from different tapes");
    needs = needs || node(in).requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(fn) : BackwardFn{}, nullptr});
  return {this, nodes_.size() - 1};
}

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id >= nodes_.size()) throw Error("variable does not belong to this tape");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw Error("variable does not belong to this tape");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

std::vector<double> Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return std::vector<double>(n.value.size(), 0.0);
  return n.grad;
}

std::span<double> Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.requires_grad) return {};
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var output) {
  std::vector<double> ones(value(output).size(), 1.0);
  backward(output, ones);
}

void Tape::backward(Var output, std::span<const double> seed) {
  Node& out = node(output);
  if (seed.size() != out.value.size())
    throw ShapeError("backward seed has " + std::to_string(seed.size()) + " values, output has " +
                     std::to_string(out.value.size()));
  if (!out.requires_grad) return;
  auto g = grad_buffer(output);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];

  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.bound) {
      auto pg = n.bound->tensor.ensure_grad();
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
    }
  }
}

}  // namespace msmr::numeric
