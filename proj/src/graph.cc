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

#include "eend/graph.h"

#include <utility>

#include "eend/errors.h"

namespace eend {

const Tensor& Var::value() const {
  if (!graph_) throw ContractError("use of an unbound Var");
  return graph_->value(id_);
}

Tensor Var::grad() const {
  if (!graph_) throw ContractError("use of an unbound Var");
  return graph_->GradOf(id_);
}

Graph::Graph(bool track_gradients) : track_(track_gradients) {}

Var Graph::Push(Tensor value, bool needs_grad, AdjointFn adjoint) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad && track_;
  if (node.needs_grad) node.adjoint = std::move(adjoint);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::Constant(Tensor value) {
  return Push(std::move(value), false, nullptr);
}

Var Graph::Leaf(Tensor value) { return Push(std::move(value), true, nullptr); }

Var Graph::Record(Tensor value, std::span<const Var> inputs,
                  AdjointFn adjoint) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.graph() != this) {
      throw ContractError("operation mixes nodes from different graphs");
    }
    needs = needs || nodes_[v.id()].needs_grad;
  }
  return Push(std::move(value), needs, std::move(adjoint));
}

void Graph::AccumulateGrad(int id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (g.shape() != n.value.shape()) {
    throw DimensionError("gradient shape " + ShapeString(g.shape()) +
                         " does not match node shape " +
                         ShapeString(n.value.shape()));
  }
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  Real* dst = n.grad.data();
  const Real* src = g.data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
}

Tensor& Graph::GradBuffer(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

Tensor Graph::GradOf(int id) const {
  const Node& n = nodes_[id];
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape());
}

void Graph::Backward(Var loss) {
  if (loss.graph() != this) {
    throw ContractError("backward: loss belongs to a different graph");
  }
  if (nodes_[loss.id()].value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        ShapeString(nodes_[loss.id()].value.shape()));
  }
  if (!track_) throw ContractError("backward on a graph without tracking");
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  last_visits_ = 0;
  Node& root = nodes_[loss.id()];
  if (!root.needs_grad) return;
  root.grad = Tensor(root.value.shape(), Real{1});
  root.has_grad = true;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.adjoint) continue;
    // Inputs always precede their output, so the adjoint never writes n.grad.
    n.adjoint(*this, n.value, n.grad);
    ++last_visits_;
  }
}

}  // namespace eend
