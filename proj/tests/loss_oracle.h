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

#ifndef EEND_TESTS_LOSS_ORACLE_H_
#define EEND_TESTS_LOSS_ORACLE_H_

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "eend/tensor.h"

namespace eend::testing {

// Permutation-free BCE by recursive-swap enumeration, sharing no code with
// the library. Each entry is the defining -(y log z + (1 - y) log(1 - z)),
// summed frame by frame and divided by T*C, so the minimum can be compared
// bit for bit. Posteriors must lie inside the clip range.
inline Real BruteForcePf(const Tensor& z, const Tensor& l) {
  const std::size_t c = l.cols();
  std::vector<std::size_t> perm(c);
  for (std::size_t i = 0; i < c; ++i) perm[i] = i;
  Real best = std::numeric_limits<Real>::infinity();
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == c) {
      Real s = 0;
      for (std::size_t t = 0; t < z.rows(); ++t) {
        for (std::size_t j = 0; j < c; ++j) {
          const Real y = l(t, perm[j]);
          s -= y * std::log(z(t, j)) + (1 - y) * std::log(1 - z(t, j));
        }
      }
      best = std::min(best, s / static_cast<Real>(z.size()));
      return;
    }
    for (std::size_t i = k; i < c; ++i) {
      std::swap(perm[k], perm[i]);
      rec(k + 1);
      std::swap(perm[k], perm[i]);
    }
  };
  rec(0);
  return best;
}

}  // namespace eend::testing

#endif  // EEND_TESTS_LOSS_ORACLE_H_
