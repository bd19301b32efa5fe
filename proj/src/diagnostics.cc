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

#include "eend/diagnostics.h"

#include <chrono>

#include "eend/loss.h"
#include "eend/model.h"
#include "eend/rng.h"

namespace eend {
namespace {

constexpr std::size_t kFrames = 8;
constexpr std::size_t kInDim = 6;

Tensor RandomFeatures(SplitMix64& rng) {
  Tensor x({kFrames, kInDim});
  for (Real& v : x.values()) v = rng.Uniform(-1, 1);
  return x;
}

Tensor RandomLabels(SplitMix64& rng, std::size_t speakers) {
  Tensor l({kFrames, speakers});
  for (Real& v : l.values()) v = rng.Uniform() < 0.5 ? 1 : 0;
  return l;
}

GradCheckCase Timed(const std::string& name, const ScalarFunction& f, const ParamSet& p) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckCase c;
  c.name = name;
  c.report = GradCheck(f, p);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

}  // namespace

std::vector<GradCheckCase> StandardGradChecks(std::uint64_t seed) {
  std::vector<GradCheckCase> cases;
  SplitMix64 rng(DeriveSeed(seed, 1));

  SaEendConfig sa;
  sa.in_dim = kInDim;
  sa.model_dim = 16;
  sa.heads = 4;
  sa.ffn_dim = 32;
  sa.speakers = 2;

  {
    SaEendConfig c = sa;
    c.blocks = 1;
    const ParamSet p = InitSaEend(c, DeriveSeed(seed, 2));
    const Tensor x = RandomFeatures(rng);
    const Tensor l = RandomLabels(rng, 2);
    cases.push_back(Timed(
        "encoder_block",
        [&](Graph& g, const BoundParams& b) {
          return PermutationFreeLoss(SaEendForward(g.Constant(x), b, c).z, l).loss;
        },
        p));
  }
  {
    SaEendConfig c = sa;
    c.blocks = 2;
    const ParamSet p = InitSaEend(c, DeriveSeed(seed, 3));
    const Tensor x = RandomFeatures(rng);
    const Tensor l = RandomLabels(rng, 2);
    // The last two frames act as padding.
    const std::size_t valid = kFrames - 2;
    cases.push_back(Timed(
        "sa_eend",
        [&](Graph& g, const BoundParams& b) {
          return PermutationFreeLoss(SaEendForward(g.Constant(x), b, c, valid).z, l, valid)
              .loss;
        },
        p));
  }
  {
    BlstmConfig c;
    c.in_dim = kInDim;
    c.layers = 1;
    c.hidden = 5;
    c.dc_layer = 1;
    c.embed_dim = 4;
    c.speakers = 2;
    const ParamSet p = InitBlstm(c, DeriveSeed(seed, 4));
    const Tensor x = RandomFeatures(rng);
    const Tensor l = RandomLabels(rng, 2);
    cases.push_back(Timed(
        "blstm_dc",
        [&](Graph& g, const BoundParams& b) {
          const auto out = BlstmForward(g.Constant(x), b, c);
          return MultiObjective(PermutationFreeLoss(out.z, l).loss, DcLoss(out.embeddings, l),
                                0.5);
        },
        p));
  }
  return cases;
}

}  // namespace eend
