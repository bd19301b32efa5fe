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

// Index-parallel loop for independent work items (recordings, mixtures).

#ifndef EEND_PARALLEL_H_
#define EEND_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace eend {

// Calls fn(i) for every i in [0, n) on up to `jobs` threads (jobs <= 1 runs
// inline, in order). fn must only touch state owned by item i. Items are
// started in index order and none are started after a failure; every item
// below a failing one still completes, so the exception rethrown (that of the
// lowest failing index) does not depend on scheduling.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace eend

#endif  // EEND_PARALLEL_H_
