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

#ifndef EEND_GRAD_CHECK_H_
#define EEND_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "eend/params.h"

namespace eend {

// Builds a scalar loss from bound parameters on the given graph.
using ScalarFunction = std::function<Var(Graph&, const BoundParams&)>;

struct GradCheckOptions {
  Real eps = 1e-5;
  // Coordinates sampled per parameter tensor; 0 checks all of them.
  std::size_t coords_per_tensor = 0;
  // Denominator floor for the relative error. Central differences at
  // eps = 1e-5 carry roundoff near 1e-11, so gradients that are exactly zero
  // (attention key biases, for one) are compared on an absolute scale.
  Real abs_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  Real max_relative_error = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  Real analytic = 0;
  Real numeric = 0;
  std::size_t coords_checked = 0;
};

// Compares backward() gradients with central differences
// (f(theta + eps) - f(theta - eps)) / (2 eps), coordinate by coordinate.
// The relative error is |analytic - numeric| / max(|analytic|, |numeric|,
// abs_floor); the report carries the worst coordinate.
GradCheckReport GradCheck(const ScalarFunction& f, const ParamSet& params,
                          const GradCheckOptions& options = {});

// Value of f without recording adjoints.
Real EvaluateScalar(const ScalarFunction& f, const ParamSet& params);

}  // namespace eend

#endif  // EEND_GRAD_CHECK_H_
