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

#include "eend/labels.h"

#include <string>

#include "eend/errors.h"

namespace eend {

LabelSequence::LabelSequence(std::size_t frames, std::size_t speakers,
                             double frame_period)
    : frames_(frames), speakers_(speakers), frame_period_(frame_period) {
  if (speakers == 0) throw ParameterError("label sequence needs >= 1 speaker");
  set_frame_period(frame_period);
  bits_.assign(frames * speakers, 0);
}

void LabelSequence::set_frame_period(double fp) {
  if (!(fp > 0)) {
    throw ParameterError("frame_period must be positive, got " +
                         std::to_string(fp));
  }
  frame_period_ = fp;
}

LabelSequence LabelSequence::FromTensor(const Tensor& t, double frame_period) {
  RequireMatrix(t, "LabelSequence::FromTensor");
  LabelSequence out(t.rows(), t.cols(), frame_period);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) {
      throw ParameterError("label value at flat index " + std::to_string(i) +
                           " is " + std::to_string(t[i]) + ", expected 0 or 1");
    }
    out.bits_[i] = t[i] == 1.0 ? 1 : 0;
  }
  return out;
}

std::size_t LabelSequence::RowSum(std::size_t t) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < speakers_; ++c) n += bits_[t * speakers_ + c];
  return n;
}

Tensor LabelSequence::ToTensor() const {
  if (frames_ == 0) throw EmptyInputError("label sequence has no frames");
  Tensor t({frames_, speakers_});
  for (std::size_t i = 0; i < bits_.size(); ++i) t[i] = bits_[i];
  return t;
}

}  // namespace eend
