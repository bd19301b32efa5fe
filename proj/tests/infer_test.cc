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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eend/errors.h"
#include "eend/ops.h"
#include "eend/rng.h"
#include "test_util.h"
#include "eend/score.h"

namespace eend {
namespace {

LabelSequence Column(std::initializer_list<int> bits) {
  LabelSequence l(bits.size(), 1);
  std::size_t t = 0;
  for (int b : bits) l.set(t++, 0, b != 0);
  return l;
}

LabelSequence RandomLabels(std::size_t frames, std::size_t speakers, SplitMix64& rng,
                           double p = 0.5) {
  LabelSequence l(frames, speakers);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t c = 0; c < speakers; ++c) l.set(t, c, rng.Uniform() < p);
  return l;
}

TEST(ThresholdTest, BoundaryCountsAsActive) {
  const auto l = ThresholdDecisions(Tensor({3, 2}, 0.5), 0.5);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_TRUE(l(t, 0) && l(t, 1));
}

TEST(ThresholdTest, PerSpeakerDecisions) {
  const auto l = ThresholdDecisions(Tensor::Matrix({{0.9, 0.4}}), 0.5);
  EXPECT_TRUE(l(0, 0));
  EXPECT_FALSE(l(0, 1));
  EXPECT_THROW(ThresholdDecisions(Tensor::Matrix({{0.9, 0.4}}), 1.0), ParameterError);
  EXPECT_THROW(ThresholdDecisions(Tensor::Matrix({{0.9, 0.4}}), 0.0), ParameterError);
}

TEST(ThresholdTest, RaisingThresholdNeverActivates) {
  SplitMix64 rng(1);
  Tensor z({50, 3});
  for (Real& v : z.values()) v = rng.Uniform(0.001, 0.999);
  for (double lo = 0.05; lo < 0.95; lo += 0.05) {
    const auto a = ThresholdDecisions(z, lo), b = ThresholdDecisions(z, lo + 0.05);
    for (std::size_t t = 0; t < 50; ++t)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_TRUE(!b(t, c) || a(t, c));
  }
}

TEST(ThresholdTest, LargerLogitNeverDeactivates) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.Uniform(-6, 6), dx = rng.Uniform(0, 3);
    const double th = rng.Uniform(0.05, 0.95);
    const bool before = SigmoidValue(x) >= th, after = SigmoidValue(x + dx) >= th;
    EXPECT_TRUE(!before || after);
  }
}

TEST(MedianFilterTest, ConstantColumnsAreUnchanged) {
  LabelSequence ones(20, 2);
  for (std::size_t t = 0; t < 20; ++t) ones.set(t, 0, true);
  EXPECT_EQ(MedianFilter(ones, 11), ones);
}

TEST(MedianFilterTest, IsolatedFrameIsRemoved) {
  LabelSequence l(30, 1);
  l.set(15, 0, true);
  EXPECT_EQ(MedianFilter(l, 11), LabelSequence(30, 1));
}

TEST(MedianFilterTest, SupportedRunSurvivesWindowThree) {
  const auto l = Column({0, 0, 1, 1, 1, 0, 0});
  EXPECT_EQ(MedianFilter(l, 3), l);
}

TEST(MedianFilterTest, EdgesShrinkTheWindow) {
  // Frame 0 sees only itself; frame 1 sees frames 0..2.
  const auto l = Column({1, 0, 0, 0, 0, 0, 1});
  EXPECT_EQ(MedianFilter(l, 11), l);
  EXPECT_EQ(MedianFilter(Column({1, 1, 0, 0, 0}), 5), Column({1, 1, 0, 0, 0}));
}

TEST(MedianFilterTest, EvenWindowIsParameterError) {
  EXPECT_THROW(MedianFilter(Column({1, 0}), 4), ParameterError);
  EXPECT_THROW(MedianFilter(Column({1, 0}), 0), ParameterError);
}

TEST(MedianFilterTest, IsMonotone) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = RandomLabels(40, 2, rng);
    LabelSequence b = a;
    for (std::size_t t = 0; t < 40; ++t)
      for (std::size_t c = 0; c < 2; ++c)
        if (rng.Uniform() < 0.2) b.set(t, c, true);
    for (int w : {3, 5, 11}) {
      const auto fa = MedianFilter(a, w), fb = MedianFilter(b, w);
      for (std::size_t t = 0; t < 40; ++t)
        for (std::size_t c = 0; c < 2; ++c) ASSERT_TRUE(!fa(t, c) || fb(t, c));
    }
  }
}

TEST(MedianFilterTest, WindowThreeFixedPointsHaveNoIsolatedInteriorFrames) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    auto l = RandomLabels(24, 1, rng);
    bool isolated = false;
    for (std::size_t t = 1; t + 1 < 24; ++t)
      isolated |= l(t, 0) != l(t - 1, 0) && l(t, 0) != l(t + 1, 0);
    EXPECT_EQ(MedianFilter(l, 3) == l, !isolated);
    // Repeated filtering settles within T passes.
    for (int pass = 0; pass < 24; ++pass) l = MedianFilter(l, 3);
    EXPECT_EQ(MedianFilter(l, 3), l);
  }
}

TEST(MedianFilterTest, AlternatingRunsNeedMoreThanOnePass) {
  const auto once = MedianFilter(Column({0, 1, 0, 1, 0, 1}), 3);
  EXPECT_EQ(once, Column({0, 0, 1, 0, 1, 1}));
  EXPECT_NE(MedianFilter(once, 3), once);
}

TEST(SegmentsTest, AllZerosGiveNoSegments) {
  EXPECT_TRUE(FramesToSegments(LabelSequence(10, 2, 0.1)).segments.empty());
}

TEST(SegmentsTest, RunBecomesHalfOpenInterval) {
  LabelSequence l(8, 2, 0.1);
  for (std::size_t t = 3; t <= 5; ++t) l.set(t, 0, true);
  const auto hyp = FramesToSegments(l, "rec");
  ASSERT_EQ(hyp.segments.size(), 1u);
  EXPECT_EQ(hyp.segments[0], (Segment{0, 0.3, 0.6}));
  const auto rttm = ToRttm(hyp);
  EXPECT_EQ(EmitRttm(rttm), "SPEAKER rec 1 0.30 0.30 <NA> <NA> spk0 <NA> <NA>\n");
}

TEST(SegmentsTest, SeparatedRunsStaySeparate) {
  const auto hyp = FramesToSegments(Column({1, 1, 0, 1}));
  ASSERT_EQ(hyp.segments.size(), 2u);
  EXPECT_EQ(hyp.segments[0].end, 0.02);
  EXPECT_EQ(hyp.segments[1].start, 0.03);
}

TEST(SegmentsTest, RasterizingSegmentsRestoresTheFrames) {
  SplitMix64 rng(5);
  for (double fp : {0.01, 0.1, 0.025}) {
    for (int trial = 0; trial < 50; ++trial) {
      auto l = RandomLabels(60, 3, rng, 0.4);
      l.set_frame_period(fp);
      const auto rttm = ToRttm(FramesToSegments(l, "r"), {"a", "b", "c"});
      const auto back = Rasterize(ParseRttm(EmitRttm(rttm)), "r", {"a", "b", "c"}, fp, 60);
      EXPECT_EQ(back, l) << fp;
    }
  }
}

double SpeechTime(const DiarizationHypothesis& hyp) {
  double total = 0;
  for (const Segment& seg : hyp.segments) total += seg.end - seg.start;
  return total;
}

TEST(DecideTest, PipelineAndThresholdMonotonicity) {
  SplitMix64 rng(6);
  Tensor z({80, 2});
  for (Real& v : z.values()) v = rng.Uniform(0.01, 0.99);
  DecisionConfig d;
  const auto r = Decide(z, 0.1, d, "rec");
  EXPECT_EQ(r.decisions, MedianFilter(ThresholdDecisions(z, 0.5, 0.1), 11));
  EXPECT_EQ(r.hypothesis.recording, "rec");
  double last = SpeechTime(r.hypothesis);
  for (double th : {0.55, 0.6, 0.7, 0.9}) {
    d.threshold = th;
    const double t = SpeechTime(Decide(z, 0.1, d).hypothesis);
    EXPECT_LE(t, last + 1e-12);
    last = t;
  }
  d.median_window = 4;
  EXPECT_THROW(Decide(z, 0.1, d), ParameterError);
}

ModelConfig ExportConfig() {
  ModelConfig c;
  c.sa.in_dim = 6;
  c.sa.model_dim = 8;
  c.sa.heads = 2;
  c.sa.ffn_dim = 8;
  c.sa.blocks = 2;
  return c;
}

TEST(ExportAttentionTest, OneGraymapAndCsvPerHead) {
  SplitMix64 rng(7);
  const Model m = InitModel(ExportConfig(), 7);
  const Tensor x = testing::RandomTensor({10, 6}, rng);
  const auto dir = std::filesystem::temp_directory_path() / "eend_attention_test";
  std::filesystem::remove_all(dir);
  const auto paths = ExportAttention(m, x, 2, dir.string());
  ASSERT_EQ(paths.size(), 4u);
  for (std::size_t h = 0; h < 2; ++h) {
    std::ifstream pgm(paths[2 * h]);
    std::string magic;
    int w = 0, ht = 0, maxval = 0, v = 0, count = 0, top = 0;
    pgm >> magic >> w >> ht >> maxval;
    EXPECT_EQ(magic, "P2");
    EXPECT_EQ(w, 10);
    EXPECT_EQ(ht, 10);
    EXPECT_EQ(maxval, 255);
    while (pgm >> v) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 255);
      top = std::max(top, v);
      ++count;
    }
    EXPECT_EQ(count, 100);
    EXPECT_EQ(top, 255);

    std::ifstream csv(paths[2 * h + 1]);
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
      std::stringstream ss(line);
      std::string cell;
      double sum = 0;
      int cols = 0;
      while (std::getline(ss, cell, ',')) sum += std::stod(cell), ++cols;
      EXPECT_EQ(cols, 10);
      EXPECT_NEAR(sum, 1.0, 1e-6);
      ++rows;
    }
    EXPECT_EQ(rows, 10);
  }
  std::filesystem::remove_all(dir);
}

TEST(ExportAttentionTest, InvalidBlockOrArchitecture) {
  const Model m = InitModel(ExportConfig(), 8);
  const Tensor x({4, 6});
  EXPECT_THROW(AttentionMaps(m, x, 0), ParameterError);
  EXPECT_THROW(AttentionMaps(m, x, 3), ParameterError);
  ModelConfig b;
  b.arch = Architecture::kBlstm;
  b.blstm.in_dim = 6;
  b.blstm.layers = 1;
  b.blstm.hidden = 2;
  b.blstm.dc_layer = 1;
  b.blstm.embed_dim = 2;
  EXPECT_THROW(AttentionMaps(InitModel(b, 1), x, 1), ParameterError);
}

TEST(ExportAttentionTest, GraymapOfZeroMatrixIsBlack) {
  EXPECT_EQ(EncodePgm(Tensor({1, 2})), "P2\n2 1\n255\n0 0\n");
  EXPECT_EQ(EncodePgm(Tensor::Matrix({{0.5, 1.0}})), "P2\n2 1\n255\n128 255\n");
}

TEST(DiarizeTest, FeaturesThroughModel) {
  SplitMix64 rng(9);
  ModelConfig c = ExportConfig();
  const Model m = InitModel(c, 9);
  FeatureSequence f;
  f.frames = testing::RandomTensor({30, 6}, rng);
  f.frame_period = 0.1;
  const auto r = Diarize(m, f, DecisionConfig{}, "x");
  EXPECT_EQ(r.posteriors, Posteriors(m, f.frames));
  EXPECT_EQ(r.decisions.num_frames(), 30u);
  for (const Segment& s : r.hypothesis.segments) EXPECT_GT(s.end, s.start);
}

}  // namespace
}  // namespace eend
