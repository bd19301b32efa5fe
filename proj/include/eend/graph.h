// Copyright 2026 The eend Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tape-based reverse-mode differentiation.
//
// A Graph records every operation applied to its nodes in creation order.
// Creation order is a topological order, so Backward() simply walks the tape
// from the loss node down to node 0, calling each node's adjoint rule once.
// Adjoint rules add into their inputs' gradients, which is how fan-out is
// accumulated.

#ifndef EEND_GRAPH_H_
#define EEND_GRAPH_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>

#include "eend/tensor.h"

namespace eend {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while its Graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient of the last Backward() loss w.r.t. this node. Nodes that the
  // loss does not depend on report zeros.
  Tensor grad() const;
  const Shape& shape() const { return value().shape(); }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  int id_ = -1;
};

class Graph {
 public:
  // Receives the node's own value and the gradient flowing into it, and
  // adds the corresponding contributions into its inputs' gradients.
  using AdjointFn = std::function<void(Graph& graph, const Tensor& out,
                                       const Tensor& out_grad)>;

  // With track_gradients == false no adjoint rules are stored; this is the
  // inference mode.
  explicit Graph(bool track_gradients = true);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Node that never receives a gradient.
  Var Constant(Tensor value);
  // Differentiable input, e.g. a model parameter.
  Var Leaf(Tensor value);
  // Output of an operation on `inputs`. The adjoint rule is dropped when no
  // input needs a gradient.
  Var Record(Tensor value, std::span<const Var> inputs, AdjointFn adjoint);
  Var Record(Tensor value, std::initializer_list<Var> inputs,
             AdjointFn adjoint) {
    return Record(std::move(value),
                  std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(adjoint));
  }

  // Seeds d(loss)/d(loss) = 1 and replays adjoints in reverse order.
  // `loss` must be a one-element node of this graph (ContractError
  // otherwise). Gradients from a previous call are cleared first.
  void Backward(Var loss);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Adds `g` into the gradient of node `id`; no-op if the node is not
  // differentiable.
  void AccumulateGrad(int id, const Tensor& g);
  // Mutable gradient buffer for node `id`, zero-initialized on first use.
  // Only call for nodes with needs_grad(id).
  Tensor& GradBuffer(int id);
  Tensor GradOf(int id) const;

  bool tracking() const { return track_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  // Number of adjoint rules executed by the last Backward().
  std::size_t last_backward_visits() const { return last_visits_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    AdjointFn adjoint;
  };

  Var Push(Tensor value, bool needs_grad, AdjointFn adjoint);

  bool track_;
  std::deque<Node> nodes_;
  std::size_t last_visits_ = 0;
};

}  // namespace eend

#endif  // EEND_GRAPH_H_
