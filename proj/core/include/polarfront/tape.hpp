#pragma once

#include <functional>
#include <vector>

#include "polarfront/tensor.hpp"

namespace polarfront {

class Tape;

/// Handle to a node on a Tape. Plain index, cheap to copy.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Ops append nodes during the forward pass; backward()
/// replays them newest-first, accumulating gradients into every node that
/// requires them. Nodes never required (requires_grad false) or never reached
/// from the loss report zero gradients.
///
/// A second backward() without recording new nodes (or reset()) throws
/// StateError: the saved forward state is spent.
class Tape {
 public:
  /// Backward rule for one node. Receives the tape and the node's own id;
  /// reads grad(id) and scatters into grad_accum(input) for its inputs.
  using BackwardFn = std::function<void(Tape&, int)>;

  Var leaf(Tensor value, bool requires_grad = false);
  Var record(const char* op, Tensor value, std::vector<int> inputs, BackwardFn fn);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() target w.r.t. this node. Zeros if the
  /// node was unreachable or did not require gradients.
  const Tensor& grad(Var v);
  bool requires_grad(Var v) const;
  const char* op_name(Var v) const;

  void backward(Var loss);
  void reset();
  int size() const { return static_cast<int>(nodes_.size()); }

  /// For backward rules: gradient buffer of a node, zero-initialized on
  /// first touch. Accumulate with +=.
  Tensor& grad_accum(int id);
  bool grad_live(int id) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn bw;
    const char* op;
    bool requires_grad;
    bool grad_touched;
  };

  Node& node_at(int id);
  const Node& node_at(int id) const;

  std::vector<Node> nodes_;
  int nodes_at_last_backward_ = -1;
};

}  // namespace polarfront
