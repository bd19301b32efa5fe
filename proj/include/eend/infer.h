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

// Posteriors to diarization decisions: threshold (an entry is active when
// z >= threshold), per-speaker median filtering, and segment extraction.

#ifndef EEND_INFER_H_
#define EEND_INFER_H_

#include <cstddef>
#include <string>
#include <vector>

#include "eend/features.h"
#include "eend/labels.h"
#include "eend/model.h"
#include "eend/score.h"
#include "eend/tensor.h"

namespace eend {

struct DecisionConfig {
  double threshold = 0.5;
  int median_window = 11;

  void Validate() const;
};

// Requires 0 < threshold < 1.
LabelSequence ThresholdDecisions(const Tensor& z, double threshold,
                                 double frame_period = 0.1);

// Majority vote over a window centred on each frame, per speaker column.
// Near the edges the window shrinks symmetrically to the frames available,
// so frame t uses radius min(w/2, t, T-1-t). Even windows are a
// ParameterError.
LabelSequence MedianFilter(const LabelSequence& labels, int window = 11);

struct Segment {
  std::size_t speaker = 0;
  double start = 0;
  double end = 0;

  bool operator==(const Segment& other) const = default;
};

struct DiarizationHypothesis {
  std::string recording;
  // Sorted by start time, then speaker.
  std::vector<Segment> segments;
};

// Time of frame boundary i on a grid of the given period. Periods that are
// reciprocals of integers are computed as i / (1 / period) to keep values
// like 0.3 exact.
double FrameTime(std::size_t i, double frame_period);

// Each maximal run of active frames i..j of a speaker becomes the segment
// [FrameTime(i), FrameTime(j + 1)).
DiarizationHypothesis FramesToSegments(const LabelSequence& labels,
                                       const std::string& recording = "");

// Speaker k is named names[k], or "spk<k>" when names is empty.
std::vector<RttmRecord> ToRttm(const DiarizationHypothesis& hyp,
                               const std::vector<std::string>& names = {});

struct DiarizationResult {
  Tensor posteriors;  // [T x C]
  LabelSequence decisions;
  DiarizationHypothesis hypothesis;
};

// Posteriors -> threshold -> median filter -> segments.
DiarizationResult Decide(const Tensor& posteriors, double frame_period,
                         const DecisionConfig& decision, const std::string& recording = "");
DiarizationResult Diarize(const Model& model, const FeatureSequence& features,
                          const DecisionConfig& decision, const std::string& recording = "");
DiarizationResult DiarizeWaveform(const Model& model, const Waveform& wave,
                                  const DecisionConfig& decision,
                                  const FeatureOptions& features = {},
                                  const std::string& recording = "");

// Attention matrices of every head of encoder block `block` (1-based) of an
// SA-EEND model. Other architectures and out-of-range blocks are a
// ParameterError.
std::vector<Tensor> AttentionMaps(const Model& model, const Tensor& features, int block);

// Plain (P2) graymap with values mapped linearly from [0, max] to [0, 255].
std::string EncodePgm(const Tensor& matrix);
std::string EncodeCsv(const Tensor& matrix);

// Writes <prefix>-block<b>-head<h>.pgm and .csv (h 1-based) for every head
// into out_dir and returns the paths written, PGM then CSV per head.
std::vector<std::string> ExportAttention(const Model& model, const Tensor& features, int block,
                                         const std::string& out_dir,
                                         const std::string& prefix = "attention");

}  // namespace eend

#endif  // EEND_INFER_H_
