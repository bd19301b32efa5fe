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

// Log-mel filterbank front end: 25 ms Hann frames every 10 ms, power
// spectrum, HTK-scale triangular mel filters, floored natural log. Frames
// are then spliced with +-7 neighbours (edge replicated) and every 10th
// frame is kept. No mean/variance normalization is applied.

#ifndef EEND_FEATURES_H_
#define EEND_FEATURES_H_

#include <cstddef>
#include <string>
#include <vector>

#include "eend/tensor.h"

namespace eend {

inline constexpr int kSampleRate = 8000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws ParameterError for a non-positive rate, NumericError for
  // non-finite samples.
  void Validate() const;
};

struct FeatureSequence {
  Tensor frames;             // [T x F]
  double frame_period = 0.01;  // seconds between consecutive frames

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

struct LogMelOptions {
  int n_mels = 23;
  double frame_length = 0.025;
  double frame_shift = 0.010;
  double low_freq = 20.0;
  // <= 0 means the Nyquist frequency.
  double high_freq = 0.0;
  double power_floor = 1e-10;
};

struct FeatureOptions {
  LogMelOptions logmel;
  int context_left = 7;
  int context_right = 7;
  int subsample = 10;
};

double HzToMel(double hz);
double MelToHz(double mel);

// floor((num_samples - frame_len) / shift) + 1, or 0 when shorter than one
// frame.
std::size_t NumFrames(std::size_t num_samples, std::size_t frame_len,
                      std::size_t shift);

// [n_mels x (fft_size / 2 + 1)] triangular weights.
Tensor MelFilterbank(int n_mels, std::size_t fft_size, int sample_rate,
                     double low_freq, double high_freq);

// Throws EmptyInputError when the wave is shorter than one frame.
FeatureSequence LogMel(const Waveform& wave, const LogMelOptions& options = {});

FeatureSequence Splice(const FeatureSequence& f, int left = 7, int right = 7);

// Indices 0, factor, 2 * factor, ... below num_frames. Labels use the same
// rule so features and labels stay aligned.
std::vector<std::size_t> SubsampleIndices(std::size_t num_frames, int factor);
FeatureSequence Subsample(const FeatureSequence& f, int factor = 10);

// LogMel -> Splice -> Subsample.
FeatureSequence ExtractFeatures(const Waveform& wave,
                                const FeatureOptions& options = {});

// 16-bit PCM mono RIFF/WAVE at 8000 Hz. Samples are scaled by 1/32768.
// Any other layout is a FormatError naming the offending field.
Waveform ParseWav(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> EncodeWav(const Waveform& wave);
Waveform ReadWav(const std::string& path);
void WriteWav(const std::string& path, const Waveform& wave);

}  // namespace eend

#endif  // EEND_FEATURES_H_
