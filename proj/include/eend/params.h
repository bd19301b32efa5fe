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

#ifndef EEND_PARAMS_H_
#define EEND_PARAMS_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eend/graph.h"
#include "eend/tensor.h"

namespace eend {

// Named tensors in insertion order. Optimizer state, gradients and
// checkpoints all use this container so they line up entry by entry.
class ParamSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void Add(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t NumValues() const;
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // Same names and shapes, all values zero.
  ParamSet ZerosLike() const;
  bool SameLayout(const ParamSet& other) const;

  bool operator==(const ParamSet& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Leaf nodes for every entry of a ParamSet inside one Graph.
class BoundParams {
 public:
  BoundParams(Graph& graph, const ParamSet& params);

  Var operator[](std::string_view name) const;
  Graph& graph() const { return *graph_; }
  // Gradients after Graph::Backward(); parameters the loss does not touch
  // get zeros.
  ParamSet Gradients() const;

 private:
  Graph* graph_;
  const ParamSet* params_;
  std::map<std::string, Var, std::less<>> vars_;
};

}  // namespace eend

#endif  // EEND_PARAMS_H_
