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

#include "eend/infer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "eend/errors.h"

namespace eend {

void DecisionConfig::Validate() const {
  if (!(threshold > 0 && threshold < 1)) {
    throw ParameterError("threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  if (median_window < 1 || median_window % 2 == 0) {
    throw ParameterError("median_window must be odd and >= 1, got " +
                         std::to_string(median_window));
  }
}

LabelSequence ThresholdDecisions(const Tensor& z, double threshold, double frame_period) {
  RequireMatrix(z, "ThresholdDecisions");
  if (!(threshold > 0 && threshold < 1)) {
    throw ParameterError("threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  LabelSequence out(z.rows(), z.cols(), frame_period);
  for (std::size_t t = 0; t < z.rows(); ++t)
    for (std::size_t c = 0; c < z.cols(); ++c) out.set(t, c, z(t, c) >= threshold);
  return out;
}

LabelSequence MedianFilter(const LabelSequence& labels, int window) {
  if (window < 1 || window % 2 == 0) {
    throw ParameterError("median window must be odd and >= 1, got " + std::to_string(window));
  }
  const std::size_t frames = labels.num_frames();
  const auto half = static_cast<std::size_t>(window / 2);
  LabelSequence out(frames, labels.num_speakers(), labels.frame_period());
  for (std::size_t c = 0; c < labels.num_speakers(); ++c) {
    // Prefix counts of active frames.
    std::vector<std::size_t> prefix(frames + 1, 0);
    for (std::size_t t = 0; t < frames; ++t) prefix[t + 1] = prefix[t] + labels(t, c);
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t r = std::min({half, t, frames - 1 - t});
      const std::size_t on = prefix[t + r + 1] - prefix[t - r];
      out.set(t, c, 2 * on > 2 * r + 1);
    }
  }
  return out;
}

double FrameTime(std::size_t i, double frame_period) {
  const double inv = 1.0 / frame_period;
  const double rounded = std::round(inv);
  if (rounded >= 1 && std::abs(inv - rounded) < 1e-9 * rounded) {
    return static_cast<double>(i) / rounded;
  }
  return static_cast<double>(i) * frame_period;
}

DiarizationHypothesis FramesToSegments(const LabelSequence& labels, const std::string& recording) {
  DiarizationHypothesis hyp;
  hyp.recording = recording;
  const std::size_t frames = labels.num_frames();
  for (std::size_t c = 0; c < labels.num_speakers(); ++c) {
    std::size_t t = 0;
    while (t < frames) {
      if (!labels(t, c)) {
        ++t;
        continue;
      }
      std::size_t j = t;
      while (j + 1 < frames && labels(j + 1, c)) ++j;
      hyp.segments.push_back(
          {c, FrameTime(t, labels.frame_period()), FrameTime(j + 1, labels.frame_period())});
      t = j + 1;
    }
  }
  std::stable_sort(hyp.segments.begin(), hyp.segments.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.start != b.start ? a.start < b.start : a.speaker < b.speaker;
                   });
  return hyp;
}

std::vector<RttmRecord> ToRttm(const DiarizationHypothesis& hyp,
                               const std::vector<std::string>& names) {
  std::vector<RttmRecord> out;
  for (const auto& s : hyp.segments) {
    RttmRecord r;
    r.file = hyp.recording;
    r.onset = s.start;
    r.duration = s.end - s.start;
    if (names.empty()) {
      r.speaker = "spk" + std::to_string(s.speaker);
    } else if (s.speaker < names.size()) {
      r.speaker = names[s.speaker];
    } else {
      throw ContractError("no name for speaker column " + std::to_string(s.speaker));
    }
    out.push_back(std::move(r));
  }
  return out;
}

DiarizationResult Decide(const Tensor& posteriors, double frame_period,
                         const DecisionConfig& decision, const std::string& recording) {
  decision.Validate();
  DiarizationResult r;
  r.posteriors = posteriors;
  r.decisions = MedianFilter(ThresholdDecisions(posteriors, decision.threshold, frame_period),
                             decision.median_window);
  r.hypothesis = FramesToSegments(r.decisions, recording);
  return r;
}

DiarizationResult Diarize(const Model& model, const FeatureSequence& features,
                          const DecisionConfig& decision, const std::string& recording) {
  decision.Validate();
  return Decide(Posteriors(model, features.frames), features.frame_period, decision, recording);
}

DiarizationResult DiarizeWaveform(const Model& model, const Waveform& wave,
                                  const DecisionConfig& decision, const FeatureOptions& features,
                                  const std::string& recording) {
  return Diarize(model, ExtractFeatures(wave, features), decision, recording);
}

std::vector<Tensor> AttentionMaps(const Model& model, const Tensor& features, int block) {
  if (model.config.arch != Architecture::kSaEend) {
    throw ParameterError("attention export needs an sa_eend model");
  }
  if (block < 1 || block > model.config.sa.blocks) {
    throw ParameterError("block must lie in [1, " + std::to_string(model.config.sa.blocks) +
                         "], got " + std::to_string(block));
  }
  Graph g(false);
  BoundParams b(g, model.params);
  const SaEendOutput out = SaEendForward(g.Constant(features), b, model.config.sa);
  std::vector<Tensor> maps;
  for (const Var& a : out.attention[static_cast<std::size_t>(block - 1)]) maps.push_back(a.value());
  return maps;
}

std::string EncodePgm(const Tensor& matrix) {
  RequireMatrix(matrix, "EncodePgm");
  Real mx = 0;
  for (Real v : matrix.values()) mx = std::max(mx, v);
  std::string out = "P2\n" + std::to_string(matrix.cols()) + " " +
                    std::to_string(matrix.rows()) + "\n255\n";
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      const Real v = mx > 0 ? std::max<Real>(matrix(i, j), 0) / mx : 0;
      if (j) out += ' ';
      out += std::to_string(static_cast<int>(std::lround(255 * v)));
    }
    out += '\n';
  }
  return out;
}

std::string EncodeCsv(const Tensor& matrix) {
  RequireMatrix(matrix, "EncodeCsv");
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> ExportAttention(const Model& model, const Tensor& features, int block,
                                         const std::string& out_dir, const std::string& prefix) {
  const std::vector<Tensor> maps = AttentionMaps(model, features, block);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  for (std::size_t h = 0; h < maps.size(); ++h) {
    const std::string stem = (std::filesystem::path(out_dir) /
                              (prefix + "-block" + std::to_string(block) + "-head" +
                               std::to_string(h + 1))).string();
    for (const auto& [ext, text] : {std::pair{".pgm", EncodePgm(maps[h])},
                                    std::pair{".csv", EncodeCsv(maps[h])}}) {
      std::ofstream out(stem + ext, std::ios::trunc);
      out << text;
      if (!out) throw FormatError("failed writing " + stem + ext);
      paths.push_back(stem + ext);
    }
  }
  return paths;
}

}  // namespace eend
