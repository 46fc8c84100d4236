#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "msmr/numeric/parameter.hpp"
#include "msmr/numeric/tensor.hpp"

namespace msmr::numeric {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Linear record of the operations of one forward pass. Every operation
/// appends a node holding its value and a closure that pushes the node's
/// gradient to its inputs; backward() replays the closures in reverse order.
/// A tape is used for one forward/backward pass and then discarded.
class Tape {
 public:
  /// Receives the gradient of the node being processed.
  using BackwardFn = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// Leaf bound to `p`; backward() adds the node gradient into p.tensor's grad.
  Var parameter(Parameter& p);

  /// Appends an operation result. The node requires a gradient when any
  /// input does; `fn` is dropped otherwise.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
  }

  /// Seeds the output gradient with ones.
  void backward(Var output);
  void backward(Var output, std::span<const double> seed);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Gradient of `v` after backward(); zeros when nothing reached it.
  std::vector<double> grad(Var v) const;
  /// Mutable gradient buffer for `v`, allocated on first use. Empty span for
  /// nodes that do not require a gradient, so closures can skip them.
  std::span<double> grad_buffer(Var v);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* bound = nullptr;
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace msmr::numeric
