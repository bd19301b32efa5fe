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

#include "eend/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "binary_io.h"
#include "eend/errors.h"
#include "eend/rng.h"
#include "eend/simulate.h"

namespace eend {
namespace {

void RequireAtLeastOne(int value, const char* name) {
  if (value < 1) {
    throw ParameterError(std::string(name) + " must be >= 1, got " + std::to_string(value));
  }
}

int ScheduleDim(const ModelConfig& config) {
  return config.arch == Architecture::kSaEend ? config.sa.model_dim : 2 * config.blstm.hidden;
}

double StepLr(const TrainConfig& config, int d_model, std::int64_t step) {
  return config.lr_mode == LrMode::kFixed
             ? config.lr
             : config.lr * NoamLr(step, d_model, config.warmup_steps);
}

Tensor PadRows(const Tensor& a, std::size_t rows) {
  if (a.rows() == rows) return a;
  Tensor out({rows, a.cols()});
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  return out;
}

std::string CheckpointPath(const std::string& dir, int epoch, const char* ext) {
  return (std::filesystem::path(dir) / ("epoch-" + std::to_string(epoch) + ext)).string();
}

}  // namespace

void TrainConfig::Validate() const {
  RequireAtLeastOne(batch_size, "batch_size");
  RequireAtLeastOne(epochs, "epochs");
  RequireAtLeastOne(chunk_len, "chunk_len");
  RequireAtLeastOne(warmup_steps, "warmup_steps");
  RequireAtLeastOne(average_last, "average_last");
  if (!(lr >= 0) || !std::isfinite(lr)) {
    throw ParameterError("lr must be finite and >= 0, got " + std::to_string(lr));
  }
  loss.Validate();
}

double NoamLr(std::int64_t step, int d_model, int warmup) {
  if (step < 1) throw ContractError("noam_lr: step must be >= 1, got " + std::to_string(step));
  if (d_model < 1 || warmup < 1) throw ParameterError("noam_lr: d_model and warmup must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return std::pow(static_cast<double>(d_model), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

AdamState AdamState::For(const ParamSet& params, LrMode mode) {
  AdamState s;
  s.m = params.ZerosLike();
  s.v = params.ZerosLike();
  if (mode == LrMode::kFixed) {
    s.beta2 = 0.999;
    s.eps = 1e-8;
  }
  return s;
}

void AdamStep(ParamSet& params, const ParamSet& grads, AdamState& state, double lr) {
  if (!params.SameLayout(grads) || !params.SameLayout(state.m) || !params.SameLayout(state.v)) {
    throw DimensionError("adam: gradients or moments do not match the parameters");
  }
  for (const auto& [name, g] : grads.entries()) {
    if (!g.AllFinite()) throw TrainingError("non-finite gradient for parameter " + name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1 - std::pow(state.beta1, t);
  const double c2 = 1 - std::pow(state.beta2, t);
  auto& pe = params.entries();
  const auto& ge = grads.entries();
  auto& me = state.m.entries();
  auto& ve = state.v.entries();
  for (std::size_t i = 0; i < pe.size(); ++i) {
    Tensor& p = pe[i].second;
    const Tensor& g = ge[i].second;
    Tensor& m = me[i].second;
    Tensor& v = ve[i].second;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1 - state.beta2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

void SaveAdamState(const AdamState& state, const std::string& path) {
  internal::Writer w;
  w.PutBytes("EADM");
  w.Put<std::uint16_t>(1);
  w.Put<std::int64_t>(state.step);
  w.Put<double>(state.beta1);
  w.Put<double>(state.beta2);
  w.Put<double>(state.eps);
  w.PutParams(state.m);
  w.PutParams(state.v);
  const auto bytes = w.Take();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

AdamState LoadAdamState(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open optimizer state " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  try {
    internal::Reader r(bytes);
    if (r.GetString(4, "magic") != "EADM") throw FormatError("not an optimizer state file");
    if (r.Get<std::uint16_t>("version") != 1) throw FormatError("unsupported version");
    AdamState s;
    s.step = r.Get<std::int64_t>("step");
    s.beta1 = r.Get<double>("beta1");
    s.beta2 = r.Get<double>("beta2");
    s.eps = r.Get<double>("eps");
    s.m = r.GetParams();
    s.v = r.GetParams();
    if (!r.done()) throw FormatError("trailing bytes");
    if (!s.m.SameLayout(s.v)) throw FormatError("moment tensors disagree");
    return s;
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Example MakeExample(const std::string& id, const Waveform& wave, const LabelSequence& labels,
                    const FeatureOptions& features) {
  Example e;
  e.id = id;
  const FeatureSequence f = ExtractFeatures(wave, features);
  const LabelSequence l = SubsampleLabels(labels, features.subsample);
  if (l.num_frames() != f.num_frames()) {
    throw DimensionError("recording " + id + ": " + std::to_string(f.num_frames()) +
                         " feature frames vs " + std::to_string(l.num_frames()) +
                         " label frames");
  }
  e.features = f.frames;
  e.labels = l.ToTensor();
  return e;
}

std::vector<Example> Chunk(const std::vector<Example>& data, int chunk_len) {
  RequireAtLeastOne(chunk_len, "chunk_len");
  const std::size_t len = static_cast<std::size_t>(chunk_len);
  std::vector<Example> out;
  for (const Example& e : data) {
    const std::size_t t = e.features.rows();
    if (e.labels.rows() != t) {
      throw DimensionError("example " + e.id + ": " + std::to_string(t) + " feature frames vs " +
                           std::to_string(e.labels.rows()) + " label frames");
    }
    for (std::size_t begin = 0, k = 0; begin < t; begin += len, ++k) {
      const std::size_t n = std::min(len, t - begin);
      if (n < len && n < static_cast<std::size_t>(kMinChunkFrames)) break;
      Example c;
      c.id = e.id + ":" + std::to_string(k);
      c.features = Tensor({n, e.features.cols()});
      c.labels = Tensor({n, e.labels.cols()});
      std::copy_n(e.features.row(begin).begin(), n * e.features.cols(),
                  c.features.values().begin());
      std::copy_n(e.labels.row(begin).begin(), n * e.labels.cols(), c.labels.values().begin());
      out.push_back(std::move(c));
    }
  }
  return out;
}

Var SequenceLoss(const ModelConfig& config, const LossConfig& loss, Var x, const Tensor& labels,
                 const BoundParams& p, std::size_t valid_len) {
  const ModelOutput out = Forward(config, x, p, valid_len);
  const Var pf = PermutationFreeLoss(out.z, labels, valid_len, loss.bce_clip).loss;
  if (config.arch != Architecture::kBlstm) return pf;
  const Var dc = DcLoss(out.embeddings, labels, valid_len, loss.dc_normalize);
  return MultiObjective(pf, dc, loss.alpha);
}

Var BatchLoss(const ModelConfig& config, const LossConfig& loss,
              const std::vector<const Example*>& batch, Graph& g, const BoundParams& p) {
  if (batch.empty()) throw EmptyInputError("empty batch");
  std::size_t longest = 0;
  for (const Example* e : batch) longest = std::max(longest, e->features.rows());
  Var total;
  for (const Example* e : batch) {
    const std::size_t t = e->features.rows();
    const Var x = g.Constant(PadRows(e->features, longest));
    const Var l = SequenceLoss(config, loss, x, PadRows(e->labels, longest), p, t);
    total = total.valid() ? Add(total, l) : l;
  }
  return batch.size() == 1 ? total : Scale(total, 1.0 / static_cast<Real>(batch.size()));
}

double EvaluateLoss(const Model& model, const LossConfig& loss,
                    const std::vector<Example>& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0;
  for (const Example& e : data) {
    Graph g(false);
    BoundParams b(g, model.params);
    sum += SequenceLoss(model.config, loss, g.Constant(e.features), e.labels, b).value().item();
  }
  return sum / static_cast<double>(data.size());
}

FitResult Fit(const Model& init, const std::vector<Example>& train,
              const std::vector<Example>& valid, const TrainConfig& config,
              const FitOptions& options) {
  config.Validate();
  init.config.Validate();
  if (train.empty()) throw EmptyInputError("training set is empty");
  const std::vector<Example> chunks = Chunk(train, config.chunk_len);
  if (chunks.empty()) {
    throw EmptyInputError("no training chunk has at least " + std::to_string(kMinChunkFrames) +
                          " frames");
  }
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  const int d_model = ScheduleDim(init.config);
  FitResult result;
  result.model = init;
  result.adam = AdamState::For(init.params, config.lr_mode);
  std::deque<Model> recent;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const Model before = result.model;
    const AdamState adam_before = result.adam;
    std::vector<std::size_t> order(chunks.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(DeriveSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(order);

    double sum = 0;
    std::size_t batches = 0;
    double lr = 0;
    for (std::size_t start = 0; start < order.size() && !result.diverged; start += batch) {
      std::vector<const Example*> members;
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k)
        members.push_back(&chunks[order[k]]);
      double value = 0;
      try {
        Graph g;
        BoundParams b(g, result.model.params);
        const Var loss = BatchLoss(result.model.config, config.loss, members, g, b);
        value = loss.value().item();
        if (!std::isfinite(value)) throw NumericError("non-finite training loss");
        g.Backward(loss);
        lr = StepLr(config, d_model, result.adam.step + 1);
        AdamStep(result.model.params, b.Gradients(), result.adam, lr);
      } catch (const NumericError& e) {
        result.diverged = true;
        result.message = std::string(e.what()) + " in epoch " + std::to_string(epoch);
        break;
      } catch (const TrainingError& e) {
        result.diverged = true;
        result.message = std::string(e.what()) + " in epoch " + std::to_string(epoch);
        break;
      }
      sum += value;
      ++batches;
    }

    EpochRecord rec;
    if (!result.diverged) {
      rec.epoch = epoch;
      rec.train_loss = sum / static_cast<double>(batches);
      try {
        rec.valid_loss = EvaluateLoss(result.model, config.loss, valid);
      } catch (const NumericError&) {
        rec.valid_loss = std::numeric_limits<double>::quiet_NaN();
      }
      rec.lr = lr;
      if (!valid.empty() && !std::isfinite(rec.valid_loss)) {
        result.diverged = true;
        result.message = "non-finite validation loss in epoch " + std::to_string(epoch);
      }
    }
    if (result.diverged) {
      result.model = before;
      result.adam = adam_before;
      if (!options.out_dir.empty()) {
        result.message += epoch > 1 ? "; last finite checkpoint is " +
                                          CheckpointPath(options.out_dir, epoch - 1, ".eend")
                                    : "; no finite checkpoint was written";
      }
      break;
    }

    result.history.push_back(rec);
    recent.push_back(result.model);
    if (recent.size() > static_cast<std::size_t>(config.average_last)) recent.pop_front();
    if (!options.out_dir.empty()) {
      SaveModel(result.model, CheckpointPath(options.out_dir, epoch, ".eend"));
      SaveAdamState(result.adam, CheckpointPath(options.out_dir, epoch, ".adam"));
      WriteHistoryCsv(result.history,
                      (std::filesystem::path(options.out_dir) / "history.csv").string());
    }
    if (options.on_epoch) options.on_epoch(rec);
  }
  result.averaged =
      recent.empty() ? result.model : AverageModels(std::vector<Model>(recent.begin(), recent.end()));
  return result;
}

Model AverageModels(const std::vector<Model>& models) {
  if (models.empty()) throw ParameterError("average_models needs at least one model");
  Model avg = models.front();
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (!(models[i].config == avg.config) || !models[i].params.SameLayout(avg.params)) {
      throw ConfigMismatchError("average_models: checkpoint " + std::to_string(i) +
                                " does not match the first checkpoint's config");
    }
  }
  if (models.size() == 1) return avg;
  auto& out = avg.params.entries();
  for (std::size_t i = 1; i < models.size(); ++i) {
    const auto& in = models[i].params.entries();
    for (std::size_t e = 0; e < out.size(); ++e)
      for (std::size_t k = 0; k < out[e].second.size(); ++k) out[e].second[k] += in[e].second[k];
  }
  const double n = static_cast<double>(models.size());
  for (auto& [name, t] : out)
    for (Real& v : t.values()) v /= n;
  return avg;
}

FitResult Adapt(const Model& trained, const std::vector<Example>& adapt,
                const std::vector<Example>& valid, const TrainConfig& config,
                const FitOptions& options) {
  TrainConfig fixed = config;
  fixed.lr_mode = LrMode::kFixed;
  return Fit(trained, adapt, valid, fixed, options);
}

void WriteHistoryCsv(const std::vector<EpochRecord>& history, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "epoch,train_loss,valid_loss,lr\n";
  char line[160];
  for (const EpochRecord& r : history) {
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.6g\n", r.epoch, r.train_loss,
                  r.valid_loss, r.lr);
    out << line;
  }
}

}  // namespace eend
