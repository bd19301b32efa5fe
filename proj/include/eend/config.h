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

// Run configuration for the command-line tool: line-oriented "key = value"
// text with [section] headers, merged with command-line overrides.
//
//   [simulate]
//   beta = 2        # comments start with '#' or ';'
//
// Sections: corpus, simulate, features, model, train, infer, score. Unknown
// sections or keys, duplicate keys and malformed values are a ConfigError
// naming "section.key".

#ifndef EEND_CONFIG_H_
#define EEND_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eend/features.h"
#include "eend/infer.h"
#include "eend/model.h"
#include "eend/score.h"
#include "eend/simulate.h"
#include "eend/train.h"

namespace eend {

// Key under which the model initialization seed is derived from train.seed.
inline constexpr std::uint64_t kInitSeedKey = 0x494e4954;

struct RunConfig {
  CorpusOptions corpus;
  MixtureSpec simulate;
  int num_mixtures = 100;  // simulate.n
  FeatureOptions features;
  // model.in_dim is not a key; it follows from the feature settings.
  ModelConfig model;
  TrainConfig train;
  double adapt_lr = 1e-5;
  int adapt_epochs = 100;
  DecisionConfig infer;
  ScoreOptions score;

  // Assigns one value; key is "section.key".
  void Set(std::string_view key, std::string_view value);
  std::string Get(std::string_view key) const;
  static std::vector<std::string> Keys();

  // Sets corpus.seed, simulate.seed and train.seed. Every random stream of a
  // run is derived from these three.
  void SetSeed(std::uint64_t seed);

  // Checks every section and fills model in_dim from the features.
  // ConfigError naming the section on failure.
  void Resolve();

  // Every key, grouped by section, in a form Parse accepts.
  std::string ToText() const;
  bool operator==(const RunConfig& other) const;
};

// Applies the text on top of base. Does not call Resolve.
RunConfig ParseRunConfig(std::string_view text, const RunConfig& base = {});
RunConfig LoadRunConfig(const std::string& path, const RunConfig& base = {});

// Toolkit version, e.g. "0.1.0".
const char* Version();

}  // namespace eend

#endif  // EEND_CONFIG_H_
