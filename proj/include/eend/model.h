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

// Network architectures. SA-EEND: input projection, P self-attention
// encoder blocks without positional encoding, final layer norm and a
// sigmoid output layer. BLSTM-EEND: stacked bidirectional LSTMs, a sigmoid
// output layer and a unit-norm embedding head tapped at layer q.
//
// Frames are rows. Weight matrices are stored input-major ([in x out]) so
// a layer is x W + b. The per-head projections of one block are stored side
// by side in one [D x D] matrix: columns [h d, (h + 1) d) belong to head h.

#ifndef EEND_MODEL_H_
#define EEND_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eend/graph.h"
#include "eend/ops.h"
#include "eend/params.h"
#include "eend/tensor.h"

namespace eend {

inline constexpr std::uint16_t kModelFormatVersion = 1;

struct SaEendConfig {
  int in_dim = 345;
  int model_dim = 256;
  int heads = 4;
  int ffn_dim = 1024;
  int blocks = 2;
  int speakers = 2;
  bool residual = false;

  int head_dim() const { return model_dim / heads; }
  void Validate() const;
  bool operator==(const SaEendConfig&) const = default;
};

struct BlstmConfig {
  int in_dim = 345;
  int layers = 5;
  int hidden = 256;
  int dc_layer = 2;  // 1-based
  int embed_dim = 256;
  int speakers = 2;

  void Validate() const;
  bool operator==(const BlstmConfig&) const = default;
};

enum class Architecture { kSaEend, kBlstm };

std::string_view ArchitectureName(Architecture arch);
Architecture ParseArchitecture(std::string_view name);

struct ModelConfig {
  Architecture arch = Architecture::kSaEend;
  SaEendConfig sa;
  BlstmConfig blstm;

  int in_dim() const;
  int speakers() const;
  void Validate() const;
  // key=value lines covering the selected architecture only.
  std::string ToText() const;
  static ModelConfig FromText(std::string_view text);
  bool operator==(const ModelConfig& other) const;
};

struct Model {
  ModelConfig config;
  ParamSet params;
};

// Linear weights U(+-sqrt(6 / (fan_in + fan_out))) with fans taken per head
// and per LSTM gate; biases zero except the LSTM forget gate (1); layer-norm
// gains 1. Deterministic per seed.
ParamSet InitSaEend(const SaEendConfig& config, std::uint64_t seed);
ParamSet InitBlstm(const BlstmConfig& config, std::uint64_t seed);
Model InitModel(const ModelConfig& config, std::uint64_t seed);

// Throws ConfigMismatchError when names or shapes differ from a fresh init.
void CheckParamLayout(const ModelConfig& config, const ParamSet& params);

struct AttentionOutput {
  Var out;                     // [T x D]
  std::vector<Var> attention;  // H matrices [T x T]
};

// Multi-head self-attention on an already normalized input. Keys at rows
// >= valid_len get zero weight. prefix names the block, e.g. "block0".
AttentionOutput MultiHeadSelfAttention(Var e_norm, const BoundParams& p,
                                       const std::string& prefix, int heads,
                                       std::size_t valid_len = kAllRows);

// LN -> MHSA -> (+ residual) -> LN -> FFN -> (+ residual).
AttentionOutput EncoderBlock(Var e_in, const BoundParams& p, int block,
                             const SaEendConfig& config, std::size_t valid_len = kAllRows);

struct SaEendOutput {
  Var z;                                    // [T x C]
  std::vector<std::vector<Var>> attention;  // [block][head] -> [T x T]
};

SaEendOutput SaEendForward(Var x, const BoundParams& p, const SaEendConfig& config,
                           std::size_t valid_len = kAllRows);

struct BlstmOutput {
  Var z;           // [T x C]
  Var embeddings;  // [T x V], unit-norm rows
};

// One bidirectional layer: forward and backward LSTM outputs side by side.
Var BlstmLayer(Var x, const BoundParams& p, const std::string& prefix,
               std::size_t valid_len = kAllRows);

BlstmOutput BlstmForward(Var x, const BoundParams& p, const BlstmConfig& config,
                         std::size_t valid_len = kAllRows);

struct ModelOutput {
  Var z;
  Var embeddings;                           // BLSTM only
  std::vector<std::vector<Var>> attention;  // SA-EEND only
};

ModelOutput Forward(const ModelConfig& config, Var x, const BoundParams& p,
                    std::size_t valid_len = kAllRows);

// Posteriors for a feature matrix without gradient tracking.
Tensor Posteriors(const Model& model, const Tensor& features);

void SaveModel(const Model& model, const std::string& path);
std::vector<unsigned char> EncodeModel(const Model& model);
Model DecodeModel(const std::vector<unsigned char>& bytes);
Model LoadModel(const std::string& path);
// Also requires the stored config to equal expected.
Model LoadModel(const std::string& path, const ModelConfig& expected);

}  // namespace eend

#endif  // EEND_MODEL_H_
