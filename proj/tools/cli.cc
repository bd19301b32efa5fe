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

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "eend/config.h"
#include "eend/diagnostics.h"
#include "eend/errors.h"
#include "eend/features.h"
#include "eend/infer.h"
#include "eend/model.h"
#include "eend/parallel.h"
#include "eend/rng.h"
#include "eend/score.h"
#include "eend/simulate.h"
#include "eend/train.h"

namespace eend::cli {
namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  int jobs = 1;
  std::ostream& out;
  spdlog::logger& log;
};

// The resolved config with the toolkit version on the first line. The file
// is accepted by --config as is.
std::string RunConfigText(const RunConfig& config) {
  return std::string("# eend ") + Version() + "\n" + config.ToText();
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  f << text;
  if (!f) throw FormatError("failed writing " + path.string());
}

void WriteRunConfig(const fs::path& path, const RunConfig& config) {
  WriteText(path, RunConfigText(config));
}

// Features from the config must fit the model input layer.
void RequireFeatureFit(const RunConfig& config, const Model& model) {
  const int in_dim = config.model.in_dim();
  if (in_dim != model.config.in_dim()) {
    throw ConfigError("features produce " + std::to_string(in_dim) +
                      "-dim frames but the model expects " +
                      std::to_string(model.config.in_dim()) +
                      "; pass the config the model was trained with");
  }
}

std::vector<Example> LoadExamples(const Context& ctx, const std::string& dir) {
  const auto recordings = ReadMixtureSet(dir);
  std::vector<Example> examples(recordings.size());
  ParallelFor(recordings.size(), ctx.jobs, [&](std::size_t i) {
    const Recording& r = recordings[i];
    examples[i] = MakeExample(r.id, r.wave, r.labels, ctx.config.features);
  });
  ctx.log.info("loaded {} recordings from {}", examples.size(), dir);
  return examples;
}

FitOptions MakeFitOptions(const Context& ctx, const std::string& out_dir) {
  FitOptions options;
  options.out_dir = out_dir;
  options.on_epoch = [&log = ctx.log](const EpochRecord& r) {
    log.info("epoch {} train_loss {:.5f} valid_loss {:.5f} lr {:.3g}", r.epoch, r.train_loss,
             r.valid_loss, r.lr);
  };
  return options;
}

int FinishFit(const Context& ctx, const FitResult& result, const fs::path& out_dir) {
  if (result.history.empty()) {
    ctx.log.error("training diverged in the first epoch: {}", result.message);
    return kExitFailure;
  }
  SaveModel(result.averaged, (out_dir / "final.eend").string());
  SaveModel(result.model, (out_dir / "last.eend").string());
  const EpochRecord& last = result.history.back();
  ctx.out << "epochs " << result.history.size() << " train_loss " << last.train_loss
          << " valid_loss " << last.valid_loss << "\n";
  ctx.out << "model " << (out_dir / "final.eend").string() << "\n";
  if (result.diverged) {
    ctx.log.error("training stopped early: {}", result.message);
    return kExitFailure;
  }
  return kExitOk;
}

int CmdSimulate(const Context& ctx, const std::string& out_dir) {
  const RunConfig& c = ctx.config;
  ctx.log.info("generating corpus ({} speakers)", c.corpus.n_speakers);
  const Corpus corpus = GenerateCorpus(c.corpus);
  MixtureSetWriter writer(out_dir);
  const auto n = static_cast<std::size_t>(c.num_mixtures);
  // Mixtures are rendered in blocks so memory stays bounded; each depends
  // only on its own derived seed.
  const std::size_t block = static_cast<std::size_t>(std::max(1, ctx.jobs)) * 4;
  double overlap_sum = 0;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t count = std::min(block, n - start);
    const auto mixtures = SimulateMixtures(c.simulate, corpus, start, count, ctx.jobs);
    for (std::size_t k = 0; k < count; ++k) {
      writer.Add(MixtureId(start + k), mixtures[k]);
      overlap_sum += OverlapRatio(mixtures[k].labels);
    }
    ctx.log.debug("{} / {} mixtures", start + count, n);
  }
  writer.Finish();
  WriteRunConfig(fs::path(out_dir) / "config.ini", c);
  ctx.out << "mixtures " << n << " mean_overlap_ratio " << overlap_sum / static_cast<double>(n)
          << "\n";
  return kExitOk;
}

int CmdTrain(Context& ctx, const std::string& data, const std::string& valid,
             const std::string& out_dir) {
  const auto train_set = LoadExamples(ctx, data);
  const auto valid_set = valid.empty() ? std::vector<Example>{} : LoadExamples(ctx, valid);
  fs::create_directories(out_dir);
  WriteRunConfig(fs::path(out_dir) / "config.ini", ctx.config);
  const Model init =
      InitModel(ctx.config.model, DeriveSeed(ctx.config.train.seed, kInitSeedKey));
  const FitResult result =
      Fit(init, train_set, valid_set, ctx.config.train, MakeFitOptions(ctx, out_dir));
  return FinishFit(ctx, result, out_dir);
}

int CmdAdapt(Context& ctx, const std::string& model_path, const std::string& data,
             const std::string& valid, const std::string& out_dir) {
  const Model trained = LoadModel(model_path);
  RequireFeatureFit(ctx.config, trained);
  ctx.config.model = trained.config;
  TrainConfig tc = ctx.config.train;
  tc.lr_mode = LrMode::kFixed;
  tc.lr = ctx.config.adapt_lr;
  tc.epochs = ctx.config.adapt_epochs;
  const auto adapt_set = LoadExamples(ctx, data);
  const auto valid_set = valid.empty() ? std::vector<Example>{} : LoadExamples(ctx, valid);
  fs::create_directories(out_dir);
  WriteRunConfig(fs::path(out_dir) / "config.ini", ctx.config);
  const FitResult result = Adapt(trained, adapt_set, valid_set, tc, MakeFitOptions(ctx, out_dir));
  return FinishFit(ctx, result, out_dir);
}

struct InferInput {
  std::string id;
  std::string path;
};

std::vector<InferInput> CollectInferInputs(const std::vector<std::string>& wavs,
                                           const std::string& data_dir) {
  std::vector<InferInput> inputs;
  for (const auto& w : wavs) inputs.push_back({fs::path(w).stem().string(), w});
  if (!data_dir.empty()) {
    const fs::path wav_dir = fs::path(data_dir) / "wav";
    if (!fs::is_directory(wav_dir)) throw ConfigError("--data: no wav/ directory in " + data_dir);
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(wav_dir)) {
      if (e.path().extension() == ".wav") found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    for (const auto& p : found) inputs.push_back({p.stem().string(), p.string()});
  }
  if (inputs.empty()) throw ConfigError("infer: no input wav files");
  std::set<std::string> ids;
  for (const auto& in : inputs) {
    if (!ids.insert(in.id).second) throw ConfigError("infer: duplicate recording id " + in.id);
  }
  return inputs;
}

int CmdInfer(Context& ctx, const std::string& model_path, const std::vector<std::string>& wavs,
             const std::string& data_dir, const std::string& out_rttm) {
  const Model model = LoadModel(model_path);
  RequireFeatureFit(ctx.config, model);
  ctx.config.model = model.config;
  const auto inputs = CollectInferInputs(wavs, data_dir);
  std::vector<std::vector<RttmRecord>> records(inputs.size());
  ParallelFor(inputs.size(), ctx.jobs, [&](std::size_t i) {
    const auto result = DiarizeWaveform(model, ReadWav(inputs[i].path), ctx.config.infer,
                                        ctx.config.features, inputs[i].id);
    records[i] = ToRttm(result.hypothesis);
  });
  std::vector<RttmRecord> all;
  for (auto& r : records) all.insert(all.end(), r.begin(), r.end());
  WriteRttm(out_rttm, all);
  WriteRunConfig(out_rttm + ".config.ini", ctx.config);
  ctx.out << "recordings " << inputs.size() << " segments " << all.size() << "\n";
  return kExitOk;
}

std::vector<std::string> ReadIds(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open id list " + path);
  std::vector<std::string> ids;
  std::string id;
  while (f >> id) ids.push_back(id);
  return ids;
}

int CmdScore(const Context& ctx, const std::string& ref_path, const std::string& hyp_path,
             const std::string& ids_path, bool missing_as_empty, const std::string& json_path) {
  const auto ref = ReadRttm(ref_path);
  const auto hyp = ReadRttm(hyp_path);
  DerReport report;
  if (!ids_path.empty()) {
    report = ScoreDerFiles(ref, hyp, ReadIds(ids_path), ctx.config.score);
  } else if (missing_as_empty) {
    report = ScoreDerFiles(ref, hyp, RecordingIds(ref), ctx.config.score);
  } else {
    report = ScoreDer(ref, hyp, ctx.config.score);
  }
  ctx.out << FormatReportTable(report);
  if (json_path == "-") {
    ctx.out << ReportJson(report) << "\n";
  } else if (!json_path.empty()) {
    WriteText(json_path, ReportJson(report) + "\n");
    WriteRunConfig(json_path + ".config.ini", ctx.config);
  }
  return kExitOk;
}

int CmdViz(Context& ctx, const std::string& model_path, const std::string& wav, int block,
           const std::string& out_dir) {
  const Model model = LoadModel(model_path);
  RequireFeatureFit(ctx.config, model);
  ctx.config.model = model.config;
  const auto features = ExtractFeatures(ReadWav(wav), ctx.config.features);
  const auto paths = ExportAttention(model, features.frames, block, out_dir);
  WriteRunConfig(fs::path(out_dir) / "config.ini", ctx.config);
  for (const auto& p : paths) ctx.out << p << "\n";
  return kExitOk;
}

int CmdGradcheck(const Context& ctx) {
  bool ok = true;
  ctx.out << std::left << std::setw(16) << "check" << std::setw(14) << "max_rel_err"
          << std::setw(8) << "coords" << "worst\n";
  for (const auto& c : StandardGradChecks(ctx.config.train.seed)) {
    const bool pass = c.report.max_relative_error < kGradCheckTolerance;
    ok = ok && pass;
    std::ostringstream err;
    err << std::scientific << std::setprecision(2) << c.report.max_relative_error;
    ctx.out << std::left << std::setw(16) << c.name << std::setw(14) << err.str()
            << std::setw(8) << c.report.coords_checked << c.report.worst_param << "["
            << c.report.worst_index << "] " << (pass ? "ok" : "FAILED") << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

std::optional<spdlog::level::level_enum> LogLevelFromEnv() {
  const char* v = std::getenv("EEND_LOG");
  if (v == nullptr || std::string(v).empty() || std::string(v) == "info") {
    return spdlog::level::info;
  }
  if (std::string(v) == "error") return spdlog::level::err;
  if (std::string(v) == "debug") return spdlog::level::debug;
  return std::nullopt;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto level = LogLevelFromEnv();
  if (!level) {
    err << "EEND_LOG must be one of error, info, debug\n";
    return kExitUsage;
  }
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  spdlog::logger log("eend", sink);
  log.set_pattern("[%l] %v");
  log.set_level(*level);

  CLI::App app{"End-to-end neural speaker diarization toolkit", "eend"};
  app.set_version_flag("--version", Version());
  app.require_subcommand(1);
  app.fallthrough();
  std::vector<std::string> config_paths;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  app.add_option("--config", config_paths, "key = value config file; repeatable, later wins")
      ->check(CLI::ExistingFile);
  app.add_option("--set", sets, "override one key, e.g. --set train.epochs=5")
      ->type_name("SECTION.KEY=VALUE");
  app.add_option("--seed", seed, "sets corpus.seed, simulate.seed and train.seed");
  app.add_option("--jobs", jobs, "parallel workers across recordings")
      ->check(CLI::PositiveNumber);

  // Typed shortcuts for frequently changed keys; applied after --set.
  std::vector<std::pair<std::string, std::string>> shortcuts;
  auto shortcut = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                      const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&shortcuts, key](const std::string& v) { shortcuts.emplace_back(key, v); },
        help + " (" + key + ")");
  };

  std::string out_path, data, valid, model_path, ref, hyp, ids, json, wav;
  std::vector<std::string> wavs;
  int block = 2;

  auto* simulate = app.add_subcommand("simulate", "render a set of simulated mixtures");
  simulate->add_option("--out", out_path, "output directory")->required();
  shortcut(simulate, "--beta", "simulate.beta", "mean silence between utterances, s");
  shortcut(simulate, "--n", "simulate.n", "number of mixtures");

  auto* train = app.add_subcommand("train", "train a model from scratch");
  train->add_option("--data", data, "training mixture set")->required();
  train->add_option("--valid", valid, "validation mixture set");
  train->add_option("--out", out_path, "output directory")->required();
  shortcut(train, "--epochs", "train.epochs", "epochs");

  auto* adapt = app.add_subcommand("adapt", "retrain a model on an adaptation set");
  adapt->add_option("--model", model_path, "trained model")->required()->check(
      CLI::ExistingFile);
  adapt->add_option("--data", data, "adaptation mixture set")->required();
  adapt->add_option("--valid", valid, "held-out adaptation mixture set");
  adapt->add_option("--out", out_path, "output directory")->required();
  shortcut(adapt, "--epochs", "train.adapt_epochs", "epochs");
  shortcut(adapt, "--lr", "train.adapt_lr", "fixed learning rate");

  auto* infer = app.add_subcommand("infer", "diarize wav files into an RTTM");
  infer->add_option("--model", model_path, "trained model")->required()->check(
      CLI::ExistingFile);
  infer->add_option("wavs", wavs, "input wav files")->check(CLI::ExistingFile);
  infer->add_option("--data", data, "mixture set directory; all of its wav/ files");
  infer->add_option("--out", out_path, "output RTTM")->required();
  shortcut(infer, "--threshold", "infer.threshold", "decision threshold");
  shortcut(infer, "--median", "infer.median_window", "median filter window, frames");

  auto* score = app.add_subcommand("score", "diarization error rate of a hypothesis");
  score->add_option("--ref", ref, "reference RTTM")->required()->check(CLI::ExistingFile);
  score->add_option("--hyp", hyp, "hypothesis RTTM")->required()->check(CLI::ExistingFile);
  bool missing_as_empty = false;
  score->add_option("--ids", ids, "file listing the recording ids to score");
  score->add_flag("--missing-as-empty", missing_as_empty,
                  "score reference recordings absent from the hypothesis as empty");
  score->add_option("--json", json, "also write the report as JSON ('-' for stdout)");
  shortcut(score, "--collar", "score.collar", "collar, s");

  auto* viz = app.add_subcommand("viz", "export attention maps of one encoder block");
  viz->add_option("--model", model_path, "trained SA-EEND model")->required()->check(
      CLI::ExistingFile);
  viz->add_option("--wav", wav, "input wav")->required()->check(CLI::ExistingFile);
  viz->add_option("--block", block, "encoder block, 1-based");
  viz->add_option("--out", out_path, "output directory")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "check gradients against finite differences");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << Version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    RunConfig config;
    for (const auto& path : config_paths) config = LoadRunConfig(path, config);
    if (seed) config.SetSeed(*seed);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects SECTION.KEY=VALUE, got " + s);
      config.Set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : shortcuts) config.Set(key, value);
    config.Resolve();
    Context ctx{config, jobs, out, log};

    if (*simulate) return CmdSimulate(ctx, out_path);
    if (*train) return CmdTrain(ctx, data, valid, out_path);
    if (*adapt) return CmdAdapt(ctx, model_path, data, valid, out_path);
    if (*infer) return CmdInfer(ctx, model_path, wavs, data, out_path);
    if (*score) return CmdScore(ctx, ref, hyp, ids, missing_as_empty, json);
    if (*viz) return CmdViz(ctx, model_path, wav, block, out_path);
    if (*gradcheck) return CmdGradcheck(ctx);
    return kExitUsage;
  } catch (const ConfigError& e) {
    log.error("config: {}", e.what());
    return kExitUsage;
  } catch (const ParameterError& e) {
    log.error("parameter: {}", e.what());
    return kExitUsage;
  } catch (const ConfigMismatchError& e) {
    log.error("{}", e.what());
    return kExitUsage;
  } catch (const ScoreError& e) {
    log.error("score: {}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log.error("{}", e.what());
    return kExitFailure;
  }
}

}  // namespace eend::cli
