#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <utility>

#include "shuffleguard/tensor.hpp"

namespace shuffleguard {

template <typename S>
class Graph;

template <typename S>
struct GraphNode {
  Tensor<S> value;
  Tensor<S> grad;  // allocated only when requires_grad
  bool requires_grad = false;
  std::function<void()> backward;  // accumulates this node's grad into its parents'
};

// Handle to a tape node. Cheap to copy; valid only while the graph lives.
template <typename S>
struct Var {
  Graph<S>* graph = nullptr;
  GraphNode<S>* node = nullptr;

  const Tensor<S>& value() const { return node->value; }
  Tensor<S>& value() { return node->value; }
  const Tensor<S>& grad() const {
    if (!node->requires_grad) throw std::logic_error("gradient requested on a node without requires_grad");
    return node->grad;
  }
  bool requires_grad() const { return node->requires_grad; }
};

// Tape of operations in creation order; creation order is a valid topological
// order, so one reverse sweep implements backpropagation.
template <typename S>
class Graph {
 public:
  Var<S> input(Tensor<S> value, bool requires_grad = false) {
    return emplace(std::move(value), requires_grad, {});
  }

  Var<S> emplace(Tensor<S> value, bool requires_grad, std::function<void()> backward_fn) {
    nodes_.emplace_back();
    GraphNode<S>& n = nodes_.back();
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.grad = Tensor<S>(n.value.shape);
    n.backward = std::move(backward_fn);
    return Var<S>{this, &n};
  }

  // Single-shot: grads accumulate, so call at most once per graph.
  void backward(Var<S> loss) {
    if (loss.node->value.numel() != 1) {
      throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                  shape_string(loss.node->value.shape));
    }
    if (!loss.node->requires_grad) return;
    loss.node->grad.data[0] = S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      if (it->requires_grad && it->backward) it->backward();
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::deque<GraphNode<S>> nodes_;  // deque keeps node addresses stable
};

}  // namespace shuffleguard
