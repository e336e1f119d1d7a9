#include "polarfront/tape.hpp"

#include <string>
#include <utility>

#include "polarfront/errors.hpp"

namespace polarfront {

Tape::Node& Tape::node_at(int id) {
  if (id < 0 || id >= static_cast<int>(nodes_.size()))
    throw IndexError("tape node " + std::to_string(id) + " out of range [0, " +
                     std::to_string(nodes_.size()) + ")");
  return nodes_[static_cast<size_t>(id)];
}

const Tape::Node& Tape::node_at(int id) const {
  return const_cast<Tape*>(this)->node_at(id);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, {}, nullptr, "leaf", requires_grad,
                        false});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(const char* op, Tensor value, std::vector<int> inputs, BackwardFn fn) {
  bool needs = false;
  for (int in : inputs) needs = needs || node_at(in).requires_grad;
  nodes_.push_back(
      Node{std::move(value), Tensor{}, std::move(inputs), std::move(fn), op, needs, false});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const { return node_at(v.id).value; }

const Tensor& Tape::grad(Var v) {
  Node& n = node_at(v.id);
  if (!n.grad_touched) n.grad = Tensor::zeros(n.value.shape());
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node_at(v.id).requires_grad; }

const char* Tape::op_name(Var v) const { return node_at(v.id).op; }

Tensor& Tape::grad_accum(int id) {
  Node& n = node_at(id);
  if (!n.grad_touched) {
    n.grad = Tensor::zeros(n.value.shape());
    n.grad_touched = true;
  }
  return n.grad;
}

bool Tape::grad_live(int id) const { return node_at(id).grad_touched; }

void Tape::backward(Var loss) {
  Node& target = node_at(loss.id);
  if (target.value.size() != 1)
    throw ArgumentError("backward target must be scalar, got shape " +
                        target.value.shape_str());
  if (nodes_at_last_backward_ == static_cast<int>(nodes_.size()))
    throw StateError("backward called twice without a new forward pass");
  nodes_at_last_backward_ = static_cast<int>(nodes_.size());

  // Gradients always belong to the latest target only.
  for (Node& n : nodes_) {
    if (!n.grad_touched) continue;
    n.grad = Tensor{};
    n.grad_touched = false;
  }

  grad_accum(loss.id).data()[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_touched || !n.requires_grad || !n.bw) continue;
    n.bw(*this, id);
  }
}

void Tape::reset() {
  nodes_.clear();
  nodes_at_last_backward_ = -1;
}

}  // namespace polarfront
