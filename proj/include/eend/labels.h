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

#ifndef EEND_LABELS_H_
#define EEND_LABELS_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "eend/tensor.h"

namespace eend {

// T x C binary speaker activity on a fixed frame grid. T may be zero; C is
// at least one.
class LabelSequence {
 public:
  LabelSequence() : LabelSequence(0, 1) {}
  LabelSequence(std::size_t frames, std::size_t speakers,
                double frame_period = 0.01);

  // Every entry must be exactly 0 or 1 (ParameterError otherwise).
  static LabelSequence FromTensor(const Tensor& t, double frame_period = 0.01);

  std::size_t num_frames() const { return frames_; }
  std::size_t num_speakers() const { return speakers_; }
  double frame_period() const { return frame_period_; }
  void set_frame_period(double fp);

  bool operator()(std::size_t t, std::size_t c) const {
    return bits_[t * speakers_ + c] != 0;
  }
  void set(std::size_t t, std::size_t c, bool on) {
    bits_[t * speakers_ + c] = on ? 1 : 0;
  }
  // Number of active speakers in frame t.
  std::size_t RowSum(std::size_t t) const;

  // [T x C] of 0.0 / 1.0. Requires T >= 1.
  Tensor ToTensor() const;

  bool operator==(const LabelSequence& other) const = default;

 private:
  std::size_t frames_;
  std::size_t speakers_;
  double frame_period_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace eend

#endif  // EEND_LABELS_H_
