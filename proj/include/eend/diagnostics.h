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

// Standard gradient checks of the full models against central differences.

#ifndef EEND_DIAGNOSTICS_H_
#define EEND_DIAGNOSTICS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "eend/grad_check.h"

namespace eend {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
  double seconds = 0;
};

// Three checks on random inputs and labels, every coordinate:
//   encoder_block: one SA-EEND block (D=16, H=4) + permutation-free loss
//   sa_eend: two blocks (T=8, D=16, H=4), padded batch row, PF loss
//   blstm_dc: one BLSTM layer + PF loss and deep-clustering loss
std::vector<GradCheckCase> StandardGradChecks(std::uint64_t seed = 0);

}  // namespace eend

#endif  // EEND_DIAGNOSTICS_H_
