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

// Optimization: Adam, the warm-up (Noam) learning-rate schedule, chunking
// of long recordings, the epoch loop with padded and masked batches,
// checkpoint averaging and domain adaptation.

#ifndef EEND_TRAIN_H_
#define EEND_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eend/features.h"
#include "eend/labels.h"
#include "eend/loss.h"
#include "eend/model.h"
#include "eend/params.h"
#include "eend/tensor.h"

namespace eend {

inline constexpr int kMinChunkFrames = 10;

enum class LrMode { kNoam, kFixed };

struct TrainConfig {
  int batch_size = 8;
  int epochs = 40;
  int chunk_len = 500;
  int warmup_steps = 25000;
  LrMode lr_mode = LrMode::kNoam;
  // Fixed mode: the learning rate. Noam mode: a multiplier on the schedule.
  double lr = 1.0;
  int average_last = 10;
  std::uint64_t seed = 0;
  LossConfig loss;

  void Validate() const;
};

// d^-0.5 * min(step^-0.5, step * warmup^-1.5).
double NoamLr(std::int64_t step, int d_model, int warmup);

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;

  // beta2/eps follow the schedule: 0.98/1e-9 for Noam, 0.999/1e-8 for fixed.
  static AdamState For(const ParamSet& params, LrMode mode);
};

// Bias-corrected Adam update. A non-finite gradient raises TrainingError
// naming the parameter, before anything is modified.
void AdamStep(ParamSet& params, const ParamSet& grads, AdamState& state, double lr);

void SaveAdamState(const AdamState& state, const std::string& path);
AdamState LoadAdamState(const std::string& path);

struct Example {
  std::string id;
  Tensor features;  // [T x F]
  Tensor labels;    // [T x C]
};

// Network input and targets for one recording: ExtractFeatures() of the
// waveform and the 10 ms labels subsampled by the same factor.
Example MakeExample(const std::string& id, const Waveform& wave, const LabelSequence& labels,
                    const FeatureOptions& features = {});

// Consecutive non-overlapping chunks of chunk_len frames; a shorter final
// remainder is kept when it has at least kMinChunkFrames frames.
std::vector<Example> Chunk(const std::vector<Example>& data, int chunk_len);

// Loss of one sequence: PF loss, blended with DC for BLSTM. valid_len rows
// of x and labels are real, the rest is padding.
Var SequenceLoss(const ModelConfig& config, const LossConfig& loss, Var x, const Tensor& labels,
                 const BoundParams& p, std::size_t valid_len = kAllRows);

// Mean of per-sequence losses, each sequence padded with zero frames to
// the longest one and masked.
Var BatchLoss(const ModelConfig& config, const LossConfig& loss,
              const std::vector<const Example*>& batch, Graph& g, const BoundParams& p);

// Mean per-recording loss without gradient tracking.
double EvaluateLoss(const Model& model, const LossConfig& loss,
                    const std::vector<Example>& data);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double valid_loss = 0;  // NaN without validation data
  double lr = 0;          // rate at the last step of the epoch
};

struct FitOptions {
  // When set: epoch-N.eend checkpoints with .adam sidecars and history.csv.
  std::string out_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct FitResult {
  Model model;     // parameters after the last finite epoch
  Model averaged;  // mean of the last average_last finite epochs
  AdamState adam;
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string message;
};

FitResult Fit(const Model& init, const std::vector<Example>& train,
              const std::vector<Example>& valid, const TrainConfig& config,
              const FitOptions& options = {});

// Tensor-wise arithmetic mean (sum in order, then divide by N).
Model AverageModels(const std::vector<Model>& models);

// Fit with a fixed learning rate starting from trained parameters; the
// averaged field is the last-N average.
FitResult Adapt(const Model& trained, const std::vector<Example>& adapt,
                const std::vector<Example>& valid, const TrainConfig& config,
                const FitOptions& options = {});

void WriteHistoryCsv(const std::vector<EpochRecord>& history, const std::string& path);

}  // namespace eend

#endif  // EEND_TRAIN_H_
