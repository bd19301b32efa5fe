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

// Training objectives: clamped binary cross-entropy, the permutation-free
// loss (minimum BCE over speaker permutations of the labels), the deep
// clustering loss over power-set label classes, and their blend.
//
// All losses accept a valid_rows count so that padded frames of a batch
// contribute nothing, neither to the value nor to any gradient.

#ifndef EEND_LOSS_H_
#define EEND_LOSS_H_

#include <cstddef>
#include <vector>

#include "eend/graph.h"
#include "eend/ops.h"
#include "eend/tensor.h"

namespace eend {

inline constexpr Real kBceClip = 1e-7;
inline constexpr int kMaxPermutationSpeakers = 8;

struct LossConfig {
  double alpha = 0.5;  // deep clustering weight
  double bce_clip = kBceClip;
  // Divide the deep clustering loss by the squared frame count.
  bool dc_normalize = false;

  void Validate() const;
};

// Mean over the first valid_rows rows (all C columns) of
//   -[l log z + (1 - l) log(1 - z)],  z clamped to [clip, 1 - clip].
// The clamp passes no gradient where it is active.
Real BceValue(const Tensor& z, const Tensor& labels, std::size_t valid_rows = kAllRows,
              Real clip = kBceClip);
Var Bce(Var z, const Tensor& labels, std::size_t valid_rows = kAllRows, Real clip = kBceClip);

// Column c of the result is column perm[c] of labels.
Tensor PermuteColumns(const Tensor& labels, const std::vector<std::size_t>& perm);

// All permutations of 0..n-1 in lexicographic order.
std::vector<std::vector<std::size_t>> Permutations(std::size_t n);

struct PermutationResult {
  Var loss;
  std::vector<std::size_t> best_perm;
};

// min over perm of Bce(z, PermuteColumns(labels, perm)); ties go to the
// lexicographically smallest permutation. The gradient is that of the
// selected permutation. C above max_speakers is a CapacityError.
PermutationResult PermutationFreeLoss(Var z, const Tensor& labels,
                                      std::size_t valid_rows = kAllRows, Real clip = kBceClip,
                                      int max_speakers = kMaxPermutationSpeakers);

// [T x 2^C] one-hot rows; the active index of row t is sum_c l[t,c] 2^c.
Tensor PowersetOnehot(const Tensor& labels, int max_speakers = kMaxPermutationSpeakers);

// ||V V^T - L L^T||_F^2 with L = PowersetOnehot(labels), evaluated as
// ||V^T V||^2 - 2 ||V^T L||^2 + ||L^T L||^2 over the first valid_rows rows.
Var DcLoss(Var v, const Tensor& labels, std::size_t valid_rows = kAllRows,
           bool normalize = false);
// Direct T x T form, for checking.
Real DcLossDirect(const Tensor& v, const Tensor& labels);

// (1 - alpha) pf + alpha dc.
Var MultiObjective(Var pf, Var dc, Real alpha);

}  // namespace eend

#endif  // EEND_LOSS_H_
