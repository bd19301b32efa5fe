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

#include "cli.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eend/config.h"
#include "eend/features.h"
#include "eend/model.h"
#include "eend/score.h"
#include "json.hpp"

namespace eend {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult RunCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::map<std::string, std::string> ReadTree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = ReadFile(e.path());
  }
  return files;
}

double SpeechTime(const fs::path& rttm) {
  double total = 0;
  for (const auto& r : ReadRttm(rttm.string())) total += r.duration;
  return total;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("eend_cli_test_" + std::to_string(getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(Path("small.ini")) << "[corpus]\n"
                                        "n_speakers = 8\n"
                                        "utt_per_speaker = 4\n"
                                        "[simulate]\n"
                                        "n_umin = 1\n"
                                        "n_umax = 2\n"
                                        "[model]\n"
                                        "model_dim = 8\n"
                                        "heads = 2\n"
                                        "ffn_dim = 16\n"
                                        "blocks = 2\n"
                                        "[train]\n"
                                        "epochs = 3\n"
                                        "batch_size = 2\n"
                                        "warmup_steps = 10\n"
                                        "average_last = 2\n";
    ASSERT_EQ(Run({"simulate", "--n", "4", "--seed", "3", "--out", Path("train")}).code, 0);
    ASSERT_EQ(Run({"simulate", "--n", "3", "--seed", "4", "--out", Path("valid")}).code, 0);
    const auto trained = Run({"train", "--data", Path("train"), "--valid", Path("valid"),
                              "--out", Path("model"), "--seed", "5"});
    ASSERT_EQ(trained.code, 0) << trained.err;
  }

  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string Path(const std::string& name) { return (root_ / name).string(); }

  // Every command runs with the small config.
  static CliResult Run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", Path("small.ini")});
    return RunCli(args);
  }

  static fs::path root_;
};

fs::path CliTest::root_;

TEST_F(CliTest, SimulateIsByteReproducible) {
  for (const char* dir : {"sim_a", "sim_b"}) {
    const auto r = Run({"simulate", "--beta", "2", "--n", "3", "--seed", "7", "--out", Path(dir)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const auto a = ReadTree(Path("sim_a"));
  EXPECT_EQ(a, ReadTree(Path("sim_b")));
  EXPECT_EQ(a.count("ref.rttm"), 1u);
  EXPECT_EQ(a.count("meta.jsonl"), 1u);
  EXPECT_EQ(a.count("wav/mix000002.wav"), 1u);
  EXPECT_EQ(a.at("config.ini").rfind(std::string("# eend ") + Version(), 0), 0u);
  ASSERT_EQ(Run({"simulate", "--n", "3", "--seed", "7", "--jobs", "3", "--out", Path("sim_c")})
                .code,
            0);
  EXPECT_EQ(a, ReadTree(Path("sim_c")));
}

TEST_F(CliTest, NegativeBetaIsAConfigErrorNamingTheKey) {
  const auto r = Run({"simulate", "--beta", "-1", "--out", Path("bad")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(Path("bad")));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunCli({}).code, 2);
  EXPECT_EQ(RunCli({"frobnicate"}).code, 2);
  EXPECT_EQ(RunCli({"simulate"}).code, 2);
  const auto unknown = Run({"simulate", "--set", "simulate.nope=1", "--out", Path("x")});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("simulate.nope"), std::string::npos);
  EXPECT_EQ(Run({"simulate", "--set", "novalue", "--out", Path("x")}).code, 2);
  EXPECT_EQ(Run({"simulate", "--jobs", "0", "--out", Path("x")}).code, 2);
  std::ofstream(Path("bad.ini")) << "[train]\nwarmup = 3\n";
  const auto bad = RunCli({"--config", Path("bad.ini"), "gradcheck"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("train.warmup"), std::string::npos);
  EXPECT_EQ(RunCli({"--help"}).code, 0);
  EXPECT_EQ(RunCli({"--version"}).out, std::string(Version()) + "\n");
}

TEST_F(CliTest, LogLevelComesFromTheEnvironment) {
  setenv("EEND_LOG", "loud", 1);
  EXPECT_EQ(RunCli({"gradcheck"}).code, 2);
  setenv("EEND_LOG", "error", 1);
  const auto quiet = Run({"simulate", "--n", "1", "--out", Path("quiet")});
  EXPECT_EQ(quiet.code, 0);
  EXPECT_EQ(quiet.err, "");
  setenv("EEND_LOG", "debug", 1);
  const auto loud = Run({"simulate", "--n", "1", "--out", Path("loud")});
  EXPECT_NE(loud.err.find("[debug]"), std::string::npos);
  unsetenv("EEND_LOG");
}

TEST_F(CliTest, LowerBetaGivesMoreOverlap) {
  auto mean_overlap = [&](const std::string& beta) {
    const std::string dir = Path("overlap_" + beta);
    EXPECT_EQ(Run({"simulate", "--beta", beta, "--n", "40", "--seed", "11", "--set",
                   "simulate.n_umin=3", "--set", "simulate.n_umax=3", "--set",
                   "simulate.use_rir=false", "--out", dir})
                  .code,
              0);
    std::ifstream meta(fs::path(dir) / "meta.jsonl");
    std::string line;
    double sum = 0;
    int n = 0;
    while (std::getline(meta, line)) {
      sum += nlohmann::json::parse(line)["overlap_ratio"].get<double>();
      ++n;
    }
    EXPECT_EQ(n, 40);
    return sum / n;
  };
  EXPECT_GT(mean_overlap("2"), mean_overlap("5"));
}

TEST_F(CliTest, TrainWritesHistoryCheckpointsAndALoadableAverage) {
  const std::string history = ReadFile(fs::path(Path("model")) / "history.csv");
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 1 + 3);
  for (const char* f : {"epoch-1.eend", "epoch-3.eend", "epoch-3.adam", "last.eend"})
    EXPECT_TRUE(fs::exists(fs::path(Path("model")) / f)) << f;
  const Model m = LoadModel(Path("model/final.eend"));
  CheckParamLayout(m.config, m.params);
  EXPECT_EQ(m.config.sa.model_dim, 8);
  const auto wave = ReadWav(Path("valid/wav/mix000000.wav"));
  const Tensor z = Posteriors(m, ExtractFeatures(wave).frames);
  for (Real v : z.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  const RunConfig saved = LoadRunConfig(Path("model/config.ini"));
  EXPECT_EQ(saved.train.seed, 5u);
  EXPECT_EQ(saved.train.epochs, 3);
}

TEST_F(CliTest, AdaptWritesItsOwnRun) {
  const auto r = Run({"adapt", "--model", Path("model/final.eend"), "--data", Path("valid"),
                      "--epochs", "2", "--lr", "1e-4", "--out", Path("adapted")});
  ASSERT_EQ(r.code, 0) << r.err;
  const RunConfig saved = LoadRunConfig(Path("adapted/config.ini"));
  EXPECT_EQ(saved.adapt_epochs, 2);
  EXPECT_EQ(saved.adapt_lr, 1e-4);
  const std::string history = ReadFile(Path("adapted/history.csv"));
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 1 + 2);
}

TEST_F(CliTest, HigherThresholdNeverAddsSpeechTime) {
  for (const char* t : {"0.3", "0.5", "0.6", "0.8"}) {
    const auto r = Run({"infer", "--model", Path("model/final.eend"), "--data", Path("valid"),
                        "--threshold", t, "--out", Path(std::string("hyp_") + t + ".rttm")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_GE(SpeechTime(Path("hyp_0.3.rttm")), SpeechTime(Path("hyp_0.5.rttm")));
  EXPECT_GE(SpeechTime(Path("hyp_0.5.rttm")), SpeechTime(Path("hyp_0.6.rttm")));
  EXPECT_GE(SpeechTime(Path("hyp_0.6.rttm")), SpeechTime(Path("hyp_0.8.rttm")));
  EXPECT_EQ(LoadRunConfig(Path("hyp_0.6.rttm.config.ini")).infer.threshold, 0.6);
}

TEST_F(CliTest, InferOnSilenceWithAQuietModelWritesAnEmptyRttm) {
  // Zero weights and a negative output bias: every posterior is
  // sigmoid(-5), below any usable threshold.
  RunConfig c = LoadRunConfig(Path("small.ini"));
  c.Resolve();
  Model m = InitModel(c.model, 1);
  for (auto& [name, t] : m.params.entries()) t = Tensor(t.shape(), 0.0);
  m.params.at("output.b") = Tensor(m.params.at("output.b").shape(), -5.0);
  SaveModel(m, Path("quiet.eend"));
  Waveform silence;
  silence.samples.assign(3 * kSampleRate, 0.0);
  WriteWav(Path("silence.wav"), silence);
  const auto r =
      Run({"infer", "--model", Path("quiet.eend"), Path("silence.wav"), "--out", Path("s.rttm")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadFile(Path("s.rttm")), "");
}

TEST_F(CliTest, InferRejectsFeaturesThatDoNotFitTheModel) {
  const auto r = Run({"infer", "--model", Path("model/final.eend"), "--set",
                      "features.context_left=3", "--data", Path("valid"), "--out", Path("x.rttm")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("expects 345"), std::string::npos) << r.err;
}

TEST_F(CliTest, VizWritesOneMapPerHead) {
  const auto r = Run({"viz", "--model", Path("model/final.eend"), "--wav",
                      Path("valid/wav/mix000001.wav"), "--block", "2", "--out", Path("viz")});
  ASSERT_EQ(r.code, 0) << r.err;
  int pgm = 0;
  for (const auto& e : fs::directory_iterator(Path("viz"))) pgm += e.path().extension() == ".pgm";
  EXPECT_EQ(pgm, 2);
  EXPECT_TRUE(fs::exists(Path("viz/attention-block2-head2.csv")));
  EXPECT_EQ(Run({"viz", "--model", Path("model/final.eend"), "--wav",
                 Path("valid/wav/mix000001.wav"), "--block", "3", "--out", Path("viz3")})
                .code,
            2);
}

TEST_F(CliTest, ScoreOfTheReferenceAgainstItselfIsZero) {
  const auto r = Run({"score", "--ref", Path("valid/ref.rttm"), "--hyp", Path("valid/ref.rttm"),
                      "--json", Path("score.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("DER                 0.00 %"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(ReadFile(Path("score.json")));
  EXPECT_EQ(j["der"].get<double>(), 0.0);
}

TEST_F(CliTest, ScoreJsonComponentsSumToDer) {
  ASSERT_EQ(Run({"infer", "--model", Path("model/final.eend"), "--data", Path("valid"),
                 "--threshold", "0.3", "--out", Path("any.rttm")})
                .code,
            0);
  const auto r = Run({"score", "--ref", Path("valid/ref.rttm"), "--hyp", Path("any.rttm"),
                      "--missing-as-empty", "--json", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  EXPECT_NEAR(j["mi"].get<double>() + j["fa"].get<double>() + j["cf"].get<double>(),
              j["der"].get<double>(), 1e-9);
}

TEST_F(CliTest, MissingHypothesisRecordingExitsTwoListingIt) {
  const auto ref = ReadRttm(Path("valid/ref.rttm"));
  std::vector<RttmRecord> hyp;
  for (const auto& rec : ref) {
    if (rec.file != "mix000001") hyp.push_back(rec);
  }
  WriteRttm(Path("partial.rttm"), hyp);
  const auto r = Run({"score", "--ref", Path("valid/ref.rttm"), "--hyp", Path("partial.rttm")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("mix000001"), std::string::npos) << r.err;
  EXPECT_EQ(Run({"score", "--ref", Path("valid/ref.rttm"), "--hyp", Path("partial.rttm"),
                 "--missing-as-empty"})
                .code,
            0);
}

TEST_F(CliTest, GradcheckPasses) {
  const auto r = RunCli({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* name : {"encoder_block", "sa_eend", "blstm_dc"})
    EXPECT_NE(r.out.find(name), std::string::npos);
}

}  // namespace
}  // namespace eend
