#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "mgv/tensor.hpp"

namespace mgv {

// Append-only record of forward kernels. Node ids are topological by
// construction: every node's inputs precede it, so a single reverse sweep
// visits each node exactly once. A tape is owned by one training step;
// concurrent writes are not supported.
class Tape {
 public:
  // grads is indexed by node id; entries for untouched nodes have size 0.
  using BackwardFn = std::function<void(const Tensor& grad_out, std::vector<Tensor>& grads)>;

  // Registers a leaf (input/parameter) so backward can report its gradient.
  int watch(Tensor& t) {
    t.node = add_node(t.rows(), t.cols(), nullptr);
    return t.node;
  }

  int record(int rows, int cols, BackwardFn fn) { return add_node(rows, cols, std::move(fn)); }

  int size() const { return static_cast<int>(nodes_.size()); }
  int node_rows(int id) const { return nodes_[id].rows; }
  int node_cols(int id) const { return nodes_[id].cols; }

  const BackwardFn& backward_fn(int id) const { return nodes_[id].fn; }

 private:
  struct Node {
    int rows, cols;
    BackwardFn fn;  // null for leaves
  };

  int add_node(int rows, int cols, BackwardFn fn) {
    nodes_.push_back({rows, cols, std::move(fn)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

// Result of a backward pass: gradient of the loss w.r.t. every recorded node.
class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> g) : g_(std::move(g)) {}

  // Zero tensor when the node never influenced the loss.
  const Tensor& wrt(const Tensor& t) const {
    if (t.node < 0) throw std::invalid_argument("Gradients::wrt: tensor is not on the tape");
    return g_[t.node];
  }
  const Tensor& wrt(int node_id) const { return g_[node_id]; }

 private:
  std::vector<Tensor> g_;
};

Gradients backward(const Tape& tape, const Tensor& loss);

}  // namespace mgv
