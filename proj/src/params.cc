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

#include "eend/params.h"

#include "eend/errors.h"

namespace eend {

void ParamSet::Add(std::string name, Tensor value) {
  if (index_.count(name)) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

bool ParamSet::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

Tensor& ParamSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ContractError("unknown parameter '" + std::string(name) + "'");
  }
  return entries_[it->second].second;
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ContractError("unknown parameter '" + std::string(name) + "'");
  }
  return entries_[it->second].second;
}

std::size_t ParamSet::NumValues() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

ParamSet ParamSet::ZerosLike() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.Add(name, Tensor(t.shape()));
  return out;
}

bool ParamSet::SameLayout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first ||
        entries_[i].second.shape() != other.entries_[i].second.shape()) {
      return false;
    }
  }
  return true;
}

BoundParams::BoundParams(Graph& graph, const ParamSet& params)
    : graph_(&graph), params_(&params) {
  for (const auto& [name, t] : params.entries()) {
    vars_.emplace(name, graph.Leaf(t));
  }
}

Var BoundParams::operator[](std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) {
    throw ContractError("parameter '" + std::string(name) + "' is not bound");
  }
  return it->second;
}

ParamSet BoundParams::Gradients() const {
  ParamSet grads;
  for (const auto& [name, t] : params_->entries()) {
    grads.Add(name, vars_.find(name)->second.grad());
  }
  return grads;
}

}  // namespace eend
