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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "eend/errors.h"

#ifndef EEND_VERSION
#define EEND_VERSION "unknown"
#endif

namespace eend {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError(std::string(key) + ": cannot parse '" + std::string(value) + "' as " + what);
}

template <typename T>
void ParseNumber(std::string_view key, std::string_view v, T& out, const char* what) {
  T parsed{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) BadValue(key, v, what);
  out = parsed;
}

void Parse(std::string_view key, std::string_view v, int& out) {
  ParseNumber(key, v, out, "an integer");
}

void Parse(std::string_view key, std::string_view v, std::uint64_t& out) {
  ParseNumber(key, v, out, "an unsigned integer");
}

void Parse(std::string_view key, std::string_view v, double& out) {
  ParseNumber(key, v, out, "a number");
  if (std::isnan(out)) BadValue(key, v, "a number");
}

void Parse(std::string_view key, std::string_view v, bool& out) {
  if (v == "true" || v == "1" || v == "yes") {
    out = true;
  } else if (v == "false" || v == "0" || v == "no") {
    out = false;
  } else {
    BadValue(key, v, "a boolean (true/false)");
  }
}

void Parse(std::string_view key, std::string_view v, std::vector<double>& out) {
  std::vector<double> parsed;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = std::min(v.find(',', pos), v.size());
    double x = 0;
    Parse(key, Trim(v.substr(pos, comma - pos)), x);
    parsed.push_back(x);
    pos = comma + 1;
  }
  out = std::move(parsed);
}

void Parse(std::string_view key, std::string_view v, Architecture& out) {
  try {
    out = ParseArchitecture(v);
  } catch (const Error&) {
    BadValue(key, v, "an architecture (sa_eend, blstm)");
  }
}

void Parse(std::string_view key, std::string_view v, LrMode& out) {
  if (v == "noam") {
    out = LrMode::kNoam;
  } else if (v == "fixed") {
    out = LrMode::kFixed;
  } else {
    BadValue(key, v, "a learning-rate mode (noam, fixed)");
  }
}

std::string Format(int v) { return std::to_string(v); }
std::string Format(std::uint64_t v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(Architecture v) { return std::string(ArchitectureName(v)); }
std::string Format(LrMode v) { return v == LrMode::kNoam ? "noam" : "fixed"; }

// Shortest text that parses back to the same double.
std::string Format(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string Format(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + Format(v[i]);
  return s;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define EEND_FIELD(name, member)                                            \
  Field {                                                                   \
    name, [](const RunConfig& c) { return Format(c.member); },              \
        [](RunConfig& c, std::string_view v) { Parse(name, v, c.member); } \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      EEND_FIELD("corpus.n_speakers", corpus.n_speakers),
      EEND_FIELD("corpus.utt_per_speaker", corpus.utt_per_speaker),
      EEND_FIELD("corpus.utt_min_dur", corpus.utt_min_dur),
      EEND_FIELD("corpus.utt_max_dur", corpus.utt_max_dur),
      EEND_FIELD("corpus.n_noises", corpus.n_noises),
      EEND_FIELD("corpus.noise_dur", corpus.noise_dur),
      EEND_FIELD("corpus.n_rirs", corpus.n_rirs),
      EEND_FIELD("corpus.rir_min_dur", corpus.rir_min_dur),
      EEND_FIELD("corpus.rir_max_dur", corpus.rir_max_dur),
      EEND_FIELD("corpus.seed", corpus.seed),
      EEND_FIELD("simulate.n", num_mixtures),
      EEND_FIELD("simulate.n_spk", simulate.n_spk),
      EEND_FIELD("simulate.n_umin", simulate.n_umin),
      EEND_FIELD("simulate.n_umax", simulate.n_umax),
      EEND_FIELD("simulate.beta", simulate.beta),
      EEND_FIELD("simulate.snr", simulate.snr_choices),
      EEND_FIELD("simulate.use_rir", simulate.use_rir),
      EEND_FIELD("simulate.seed", simulate.seed),
      EEND_FIELD("features.n_mels", features.logmel.n_mels),
      EEND_FIELD("features.frame_length", features.logmel.frame_length),
      EEND_FIELD("features.frame_shift", features.logmel.frame_shift),
      EEND_FIELD("features.low_freq", features.logmel.low_freq),
      EEND_FIELD("features.high_freq", features.logmel.high_freq),
      EEND_FIELD("features.context_left", features.context_left),
      EEND_FIELD("features.context_right", features.context_right),
      EEND_FIELD("features.subsample", features.subsample),
      EEND_FIELD("model.arch", model.arch),
      Field{"model.speakers", [](const RunConfig& c) { return Format(c.model.sa.speakers); },
            [](RunConfig& c, std::string_view v) {
              Parse("model.speakers", v, c.model.sa.speakers);
              c.model.blstm.speakers = c.model.sa.speakers;
            }},
      EEND_FIELD("model.model_dim", model.sa.model_dim),
      EEND_FIELD("model.heads", model.sa.heads),
      EEND_FIELD("model.ffn_dim", model.sa.ffn_dim),
      EEND_FIELD("model.blocks", model.sa.blocks),
      EEND_FIELD("model.residual", model.sa.residual),
      EEND_FIELD("model.layers", model.blstm.layers),
      EEND_FIELD("model.hidden", model.blstm.hidden),
      EEND_FIELD("model.dc_layer", model.blstm.dc_layer),
      EEND_FIELD("model.embed_dim", model.blstm.embed_dim),
      EEND_FIELD("train.batch_size", train.batch_size),
      EEND_FIELD("train.epochs", train.epochs),
      EEND_FIELD("train.chunk_len", train.chunk_len),
      EEND_FIELD("train.warmup_steps", train.warmup_steps),
      EEND_FIELD("train.lr_mode", train.lr_mode),
      EEND_FIELD("train.lr", train.lr),
      EEND_FIELD("train.average_last", train.average_last),
      EEND_FIELD("train.seed", train.seed),
      EEND_FIELD("train.alpha", train.loss.alpha),
      EEND_FIELD("train.dc_normalize", train.loss.dc_normalize),
      EEND_FIELD("train.adapt_lr", adapt_lr),
      EEND_FIELD("train.adapt_epochs", adapt_epochs),
      EEND_FIELD("infer.threshold", infer.threshold),
      EEND_FIELD("infer.median_window", infer.median_window),
      EEND_FIELD("score.collar", score.collar),
      EEND_FIELD("score.frame_step", score.frame_step),
      EEND_FIELD("score.max_speakers", score.max_speakers),
  };
  return fields;
}

#undef EEND_FIELD

const Field& FindField(std::string_view key) {
  for (const Field& f : Fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key " + std::string(key));
}

const std::vector<std::string>& Sections() {
  static const std::vector<std::string> sections = {"corpus", "simulate", "features", "model",
                                                    "train",  "infer",    "score"};
  return sections;
}

// Runs check and reports any ParameterError under the section name.
void CheckSection(const char* section, const std::function<void()>& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[") + section + "] " + e.what());
  }
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

}  // namespace

void RunConfig::Set(std::string_view key, std::string_view value) {
  FindField(key).set(*this, Trim(value));
}

std::string RunConfig::Get(std::string_view key) const { return FindField(key).get(*this); }

std::vector<std::string> RunConfig::Keys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.emplace_back(f.key);
  return keys;
}

void RunConfig::SetSeed(std::uint64_t seed) {
  corpus.seed = seed;
  simulate.seed = seed;
  train.seed = seed;
}

void RunConfig::Resolve() {
  CheckSection("corpus", [&] { corpus.Validate(); });
  CheckSection("simulate", [&] {
    simulate.Validate();
    Require(num_mixtures >= 1, "n must be >= 1, got " + std::to_string(num_mixtures));
    Require(simulate.n_spk <= corpus.n_speakers,
            "n_spk " + std::to_string(simulate.n_spk) + " exceeds corpus.n_speakers " +
                std::to_string(corpus.n_speakers));
  });
  CheckSection("features", [&] {
    const LogMelOptions& m = features.logmel;
    Require(m.n_mels >= 1, "n_mels must be >= 1");
    Require(m.frame_length > 0 && m.frame_shift > 0,
            "frame_length and frame_shift must be positive");
    Require(m.low_freq >= 0, "low_freq must be >= 0");
    Require(features.context_left >= 0 && features.context_right >= 0,
            "context_left and context_right must be >= 0");
    Require(features.subsample >= 1, "subsample must be >= 1");
  });
  CheckSection("model", [&] {
    const int in_dim =
        features.logmel.n_mels * (features.context_left + features.context_right + 1);
    model.sa.in_dim = in_dim;
    model.blstm.in_dim = in_dim;
    model.Validate();
  });
  CheckSection("train", [&] {
    train.Validate();
    Require(std::isfinite(adapt_lr) && adapt_lr >= 0, "adapt_lr must be finite and >= 0");
    Require(adapt_epochs >= 1, "adapt_epochs must be >= 1");
  });
  CheckSection("infer", [&] { infer.Validate(); });
  CheckSection("score", [&] {
    Require(score.collar >= 0 && std::isfinite(score.collar), "collar must be >= 0");
    Require(score.frame_step > 0 && std::isfinite(score.frame_step),
            "frame_step must be positive");
    Require(score.max_speakers >= 1, "max_speakers must be >= 1");
  });
}

std::string RunConfig::ToText() const {
  std::string out;
  std::string section;
  for (const Field& f : Fields()) {
    const std::string_view key = f.key;
    const auto dot = key.find('.');
    const std::string s(key.substr(0, dot));
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += std::string(key.substr(dot + 1)) + " = " + f.get(*this) + "\n";
  }
  return out;
}

bool RunConfig::operator==(const RunConfig& other) const { return ToText() == other.ToText(); }

RunConfig ParseRunConfig(std::string_view text, const RunConfig& base) {
  RunConfig config = base;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::string_view line = raw;
    line = Trim(line.substr(0, line.find_first_of("#;")));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      const auto& known = Sections();
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any [section]");
    const std::string key = section + "." + std::string(Trim(line.substr(0, eq)));
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key " + key);
    try {
      config.Set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

RunConfig LoadRunConfig(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseRunConfig(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const char* Version() { return EEND_VERSION; }

}  // namespace eend
