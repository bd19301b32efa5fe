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

#include "eend/config.h"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "eend/errors.h"
#include "eend/parallel.h"

namespace eend {
namespace {

std::string ErrorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(RunConfigTest, TextRoundTripsEveryKey) {
  RunConfig c;
  c.Set("simulate.beta", "3.25");
  c.Set("simulate.snr", "5, 10, inf");
  c.Set("model.arch", "blstm");
  c.Set("train.lr_mode", "fixed");
  c.Set("train.lr", "0.1");
  c.Set("corpus.seed", "18446744073709551615");
  const RunConfig back = ParseRunConfig(c.ToText());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.simulate.snr_choices, (std::vector<double>{5, 10, kNoNoise}));
  EXPECT_EQ(back.train.lr, 0.1);
  EXPECT_EQ(back.corpus.seed, 18446744073709551615ull);
  for (const auto& key : RunConfig::Keys()) EXPECT_EQ(back.Get(key), c.Get(key)) << key;
}

TEST(RunConfigTest, DefaultsMatchTheLibraryDefaults) {
  const RunConfig c;
  EXPECT_EQ(c.simulate.beta, MixtureSpec{}.beta);
  EXPECT_EQ(c.train.warmup_steps, TrainConfig{}.warmup_steps);
  EXPECT_EQ(c.infer.threshold, 0.5);
  EXPECT_EQ(c.infer.median_window, 11);
  EXPECT_EQ(c.score.collar, 0.25);
  EXPECT_EQ(c.adapt_lr, 1e-5);
}

TEST(RunConfigTest, ParsesSectionsCommentsAndWhitespace) {
  const RunConfig c = ParseRunConfig(
      "# comment\n"
      "[simulate]\n"
      "  beta = 5   ; trailing comment\n"
      "n=7\n"
      "\n"
      "[infer]\n"
      "threshold = 0.6\n");
  EXPECT_EQ(c.simulate.beta, 5.0);
  EXPECT_EQ(c.num_mixtures, 7);
  EXPECT_EQ(c.infer.threshold, 0.6);
}

TEST(RunConfigTest, LaterTextOverridesBase) {
  RunConfig base;
  base.Set("train.epochs", "3");
  const RunConfig c = ParseRunConfig("[train]\nbatch_size = 4\n", base);
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_EQ(c.train.batch_size, 4);
}

TEST(RunConfigTest, RejectsUnknownDuplicateAndMalformedLinesNamingThem) {
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[simulate]\nbogus = 1\n"); }).find("simulate.bogus"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[nope]\n"); }).find("[nope]"), std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("beta = 1\n"); }).find("outside"), std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[train]\nepochs = 1\nepochs = 2\n"); })
                .find("duplicate key train.epochs"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[train]\nepochs\n"); }).find("line 2"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[train]\nepochs = 2.5\n"); }).find("train.epochs"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[train]\nlr_mode = cosine\n"); }).find("lr_mode"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[model]\nresidual = maybe\n"); }).find("residual"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { ParseRunConfig("[simulate]\nbeta = nan\n"); }).find("beta"),
            std::string::npos);
  EXPECT_THROW(RunConfig().Set("train.nope", "1"), ConfigError);
}

TEST(RunConfigTest, ResolveNamesTheSectionAndKey) {
  RunConfig c;
  c.Set("simulate.beta", "-1");
  const std::string msg = ErrorOf([&] { c.Resolve(); });
  EXPECT_NE(msg.find("[simulate]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("beta"), std::string::npos) << msg;

  RunConfig d;
  d.Set("infer.median_window", "4");
  EXPECT_NE(ErrorOf([&] { d.Resolve(); }).find("median_window"), std::string::npos);

  RunConfig e;
  e.Set("simulate.n_spk", "41");
  EXPECT_NE(ErrorOf([&] { e.Resolve(); }).find("n_spk"), std::string::npos);

  RunConfig f;
  f.Set("model.heads", "3");
  EXPECT_NE(ErrorOf([&] { f.Resolve(); }).find("[model]"), std::string::npos);
}

TEST(RunConfigTest, ResolveDerivesModelInputFromFeatures) {
  RunConfig c;
  c.Set("features.n_mels", "10");
  c.Set("features.context_left", "2");
  c.Set("features.context_right", "1");
  c.Resolve();
  EXPECT_EQ(c.model.in_dim(), 40);
  c.Set("model.arch", "blstm");
  c.Resolve();
  EXPECT_EQ(c.model.in_dim(), 40);
}

TEST(RunConfigTest, SetSeedCoversEveryStream) {
  RunConfig c;
  c.SetSeed(99);
  EXPECT_EQ(c.corpus.seed, 99u);
  EXPECT_EQ(c.simulate.seed, 99u);
  EXPECT_EQ(c.train.seed, 99u);
}

TEST(RunConfigTest, SpeakersKeySetsBothArchitectures) {
  RunConfig c;
  c.Set("model.speakers", "3");
  EXPECT_EQ(c.model.sa.speakers, 3);
  EXPECT_EQ(c.model.blstm.speakers, 3);
}

TEST(RunConfigTest, DoublesUseShortestRoundTripText) {
  RunConfig c;
  c.Set("simulate.beta", "0.1");
  EXPECT_EQ(c.Get("simulate.beta"), "0.1");
  c.simulate.beta = 1.0 / 3.0;
  EXPECT_EQ(ParseRunConfig(c.ToText()).simulate.beta, 1.0 / 3.0);
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  for (int jobs : {1, 2, 5}) {
    std::vector<std::atomic<int>> hits(37);
    ParallelFor(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1) << jobs;
  }
  ParallelFor(0, 3, [](std::size_t) { FAIL(); });
}

TEST(ParallelForTest, RethrowsTheLowestFailingIndex) {
  for (int jobs : {1, 4}) {
    for (int rep = 0; rep < 20; ++rep) {
      try {
        ParallelFor(50, jobs, [](std::size_t i) {
          if (i == 13 || i == 31) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
      } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "13");
      }
    }
  }
}

TEST(VersionTest, IsTheProjectVersion) { EXPECT_STREQ(Version(), EEND_VERSION); }

}  // namespace
}  // namespace eend
