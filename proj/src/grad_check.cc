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

#include "eend/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eend/errors.h"
#include "eend/rng.h"

namespace eend {

Real EvaluateScalar(const ScalarFunction& f, const ParamSet& params) {
  Graph graph(false);
  BoundParams bound(graph, params);
  return f(graph, bound).value().item();
}

GradCheckReport GradCheck(const ScalarFunction& f, const ParamSet& params,
                          const GradCheckOptions& options) {
  if (!(options.eps > 0)) throw ParameterError("grad_check: eps must be > 0");
  ParamSet grads;
  {
    Graph graph;
    BoundParams bound(graph, params);
    Var loss = f(graph, bound);
    graph.Backward(loss);
    grads = bound.Gradients();
  }

  GradCheckReport report;
  ParamSet probe = params;
  SplitMix64 rng(options.seed);
  for (auto& [name, tensor] : probe.entries()) {
    std::vector<std::size_t> coords(tensor.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.coords_per_tensor && coords.size() > options.coords_per_tensor) {
      rng.Shuffle(coords);
      coords.resize(options.coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    const Tensor& analytic = grads.at(name);
    for (std::size_t k : coords) {
      const Real saved = tensor[k];
      tensor[k] = saved + options.eps;
      const Real up = EvaluateScalar(f, probe);
      tensor[k] = saved - options.eps;
      const Real down = EvaluateScalar(f, probe);
      tensor[k] = saved;
      const Real numeric = (up - down) / (2 * options.eps);
      const Real a = analytic[k];
      const Real denom =
          std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const Real err = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      // NaN compares false, so a NaN error sticks as the worst case.
      if (report.coords_checked == 1 || !(err <= report.max_relative_error)) {
        report.max_relative_error = err;
        report.worst_param = name;
        report.worst_index = k;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace eend
