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

#include "eend/model.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "binary_io.h"
#include "eend/errors.h"
#include "eend/rng.h"

namespace eend {
namespace {

using internal::Reader;
using internal::Writer;

void RequirePositive(int value, const char* name) {
  if (value < 1) throw ParameterError(std::string(name) + " must be >= 1, got " +
                                      std::to_string(value));
}

std::size_t Dim(int v) { return static_cast<std::size_t>(v); }

Tensor Uniform(Shape shape, Real limit, SplitMix64& rng) {
  Tensor t(std::move(shape));
  for (Real& v : t.values()) v = rng.Uniform(-limit, limit);
  return t;
}

Real XavierLimit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
}

void AddLinear(ParamSet& p, const std::string& prefix, int in, int out, int fan_out,
               SplitMix64& rng) {
  p.Add(prefix + ".w", Uniform({Dim(in), Dim(out)}, XavierLimit(in, fan_out), rng));
  p.Add(prefix + ".b", Tensor({Dim(out)}));
}

void AddLayerNorm(ParamSet& p, const std::string& prefix, int dim) {
  p.Add(prefix + ".gain", Tensor({Dim(dim)}, 1.0));
  p.Add(prefix + ".bias", Tensor({Dim(dim)}));
}

void AddLstm(ParamSet& p, const std::string& prefix, int in, int hidden, SplitMix64& rng) {
  const std::size_t h = Dim(hidden);
  p.Add(prefix + ".wi", Uniform({Dim(in), 4 * h}, XavierLimit(in, hidden), rng));
  p.Add(prefix + ".wh", Uniform({h, 4 * h}, XavierLimit(hidden, hidden), rng));
  Tensor bias({4 * h});
  for (std::size_t k = h; k < 2 * h; ++k) bias[k] = 1;
  p.Add(prefix + ".b", std::move(bias));
}

Var Linear(Var x, const BoundParams& p, const std::string& prefix) {
  return AddRowVector(MatMul(x, p[prefix + ".w"]), p[prefix + ".b"]);
}

std::string BlockName(int block) { return "block" + std::to_string(block); }
std::string LayerName(int layer) { return "blstm" + std::to_string(layer); }

void RequireInput(Var x, int in_dim) {
  RequireMatrix(x.value(), "model input");
  if (x.value().cols() != Dim(in_dim)) {
    throw DimensionError("model expects " + std::to_string(in_dim) +
                         "-dimensional features, got " + ShapeString(x.shape()));
  }
}

int ParseInt(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw FormatError("model config: " + key + " is not an integer: '" + value + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw FormatError("model config: " + key + " is not a boolean: '" + value + "'");
}

}  // namespace

void SaEendConfig::Validate() const {
  RequirePositive(in_dim, "in_dim");
  RequirePositive(model_dim, "model_dim");
  RequirePositive(heads, "heads");
  RequirePositive(ffn_dim, "ffn_dim");
  RequirePositive(blocks, "blocks");
  RequirePositive(speakers, "speakers");
  if (model_dim % heads != 0) {
    throw ParameterError("model_dim " + std::to_string(model_dim) +
                         " is not divisible by heads " + std::to_string(heads));
  }
}

void BlstmConfig::Validate() const {
  RequirePositive(in_dim, "in_dim");
  RequirePositive(layers, "layers");
  RequirePositive(hidden, "hidden");
  RequirePositive(embed_dim, "embed_dim");
  RequirePositive(speakers, "speakers");
  if (dc_layer < 1 || dc_layer > layers) {
    throw ParameterError("dc_layer must lie in [1, " + std::to_string(layers) + "], got " +
                         std::to_string(dc_layer));
  }
}

std::string_view ArchitectureName(Architecture arch) {
  return arch == Architecture::kSaEend ? "sa_eend" : "blstm";
}

Architecture ParseArchitecture(std::string_view name) {
  if (name == "sa_eend") return Architecture::kSaEend;
  if (name == "blstm") return Architecture::kBlstm;
  throw ParameterError("unknown architecture '" + std::string(name) +
                       "' (expected sa_eend or blstm)");
}

int ModelConfig::in_dim() const {
  return arch == Architecture::kSaEend ? sa.in_dim : blstm.in_dim;
}

int ModelConfig::speakers() const {
  return arch == Architecture::kSaEend ? sa.speakers : blstm.speakers;
}

void ModelConfig::Validate() const {
  if (arch == Architecture::kSaEend) {
    sa.Validate();
  } else {
    blstm.Validate();
  }
}

bool ModelConfig::operator==(const ModelConfig& other) const {
  if (arch != other.arch) return false;
  return arch == Architecture::kSaEend ? sa == other.sa : blstm == other.blstm;
}

std::string ModelConfig::ToText() const {
  std::ostringstream out;
  out << "arch=" << ArchitectureName(arch) << "\n";
  if (arch == Architecture::kSaEend) {
    out << "in_dim=" << sa.in_dim << "\nmodel_dim=" << sa.model_dim << "\nheads=" << sa.heads
        << "\nffn_dim=" << sa.ffn_dim << "\nblocks=" << sa.blocks
        << "\nspeakers=" << sa.speakers << "\nresidual=" << (sa.residual ? "true" : "false")
        << "\n";
  } else {
    out << "in_dim=" << blstm.in_dim << "\nlayers=" << blstm.layers
        << "\nhidden=" << blstm.hidden << "\ndc_layer=" << blstm.dc_layer
        << "\nembed_dim=" << blstm.embed_dim << "\nspeakers=" << blstm.speakers << "\n";
  }
  return out.str();
}

ModelConfig ModelConfig::FromText(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("model config: line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto arch = kv.find("arch");
  if (arch == kv.end()) throw FormatError("model config: missing arch");
  ModelConfig c;
  c.arch = ParseArchitecture(arch->second);
  kv.erase(arch);
  for (const auto& [key, value] : kv) {
    if (c.arch == Architecture::kSaEend) {
      if (key == "in_dim") c.sa.in_dim = ParseInt(key, value);
      else if (key == "model_dim") c.sa.model_dim = ParseInt(key, value);
      else if (key == "heads") c.sa.heads = ParseInt(key, value);
      else if (key == "ffn_dim") c.sa.ffn_dim = ParseInt(key, value);
      else if (key == "blocks") c.sa.blocks = ParseInt(key, value);
      else if (key == "speakers") c.sa.speakers = ParseInt(key, value);
      else if (key == "residual") c.sa.residual = ParseBool(key, value);
      else throw FormatError("model config: unknown key " + key);
    } else {
      if (key == "in_dim") c.blstm.in_dim = ParseInt(key, value);
      else if (key == "layers") c.blstm.layers = ParseInt(key, value);
      else if (key == "hidden") c.blstm.hidden = ParseInt(key, value);
      else if (key == "dc_layer") c.blstm.dc_layer = ParseInt(key, value);
      else if (key == "embed_dim") c.blstm.embed_dim = ParseInt(key, value);
      else if (key == "speakers") c.blstm.speakers = ParseInt(key, value);
      else throw FormatError("model config: unknown key " + key);
    }
  }
  try {
    c.Validate();
  } catch (const ParameterError& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  return c;
}

ParamSet InitSaEend(const SaEendConfig& c, std::uint64_t seed) {
  c.Validate();
  SplitMix64 rng(seed);
  ParamSet p;
  const int d = c.head_dim();
  AddLinear(p, "input", c.in_dim, c.model_dim, c.model_dim, rng);
  for (int b = 0; b < c.blocks; ++b) {
    const std::string pre = BlockName(b);
    AddLayerNorm(p, pre + ".ln1", c.model_dim);
    AddLinear(p, pre + ".q", c.model_dim, c.model_dim, d, rng);
    AddLinear(p, pre + ".k", c.model_dim, c.model_dim, d, rng);
    AddLinear(p, pre + ".v", c.model_dim, c.model_dim, d, rng);
    AddLinear(p, pre + ".o", c.model_dim, c.model_dim, c.model_dim, rng);
    AddLayerNorm(p, pre + ".ln2", c.model_dim);
    AddLinear(p, pre + ".ff1", c.model_dim, c.ffn_dim, c.ffn_dim, rng);
    AddLinear(p, pre + ".ff2", c.ffn_dim, c.model_dim, c.model_dim, rng);
  }
  AddLayerNorm(p, "output.ln", c.model_dim);
  AddLinear(p, "output", c.model_dim, c.speakers, c.speakers, rng);
  return p;
}

ParamSet InitBlstm(const BlstmConfig& c, std::uint64_t seed) {
  c.Validate();
  SplitMix64 rng(seed);
  ParamSet p;
  for (int l = 0; l < c.layers; ++l) {
    const int in = l == 0 ? c.in_dim : 2 * c.hidden;
    AddLstm(p, LayerName(l) + ".fwd", in, c.hidden, rng);
    AddLstm(p, LayerName(l) + ".bwd", in, c.hidden, rng);
  }
  AddLinear(p, "output", 2 * c.hidden, c.speakers, c.speakers, rng);
  AddLinear(p, "dc", 2 * c.hidden, c.embed_dim, c.embed_dim, rng);
  return p;
}

Model InitModel(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  Model m;
  m.config = config;
  m.params = config.arch == Architecture::kSaEend ? InitSaEend(config.sa, seed)
                                                 : InitBlstm(config.blstm, seed);
  return m;
}

void CheckParamLayout(const ModelConfig& config, const ParamSet& params) {
  const ParamSet fresh = InitModel(config, 0).params;
  if (fresh.SameLayout(params)) return;
  std::string detail;
  for (const auto& [name, value] : fresh.entries()) {
    if (!params.contains(name)) {
      detail = "missing tensor " + name;
      break;
    }
    if (params.at(name).shape() != value.shape()) {
      detail = "tensor " + name + " has shape " + ShapeString(params.at(name).shape()) +
               ", config needs " + ShapeString(value.shape());
      break;
    }
  }
  if (detail.empty()) detail = "unexpected tensors for this config";
  throw ConfigMismatchError("parameters do not match the model config: " + detail);
}

AttentionOutput MultiHeadSelfAttention(Var e_norm, const BoundParams& p,
                                       const std::string& prefix, int heads,
                                       std::size_t valid_len) {
  const Var q = Linear(e_norm, p, prefix + ".q");
  const Var k = Linear(e_norm, p, prefix + ".k");
  const Var v = Linear(e_norm, p, prefix + ".v");
  const std::size_t dim = q.value().cols();
  if (heads < 1 || dim % Dim(heads) != 0) {
    throw DimensionError("attention width " + std::to_string(dim) + " does not split into " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t d = dim / Dim(heads);
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(d));
  AttentionOutput out;
  std::vector<Var> contexts;
  for (std::size_t h = 0; h < Dim(heads); ++h) {
    const Var qh = SliceCols(q, h * d, (h + 1) * d);
    const Var kh = SliceCols(k, h * d, (h + 1) * d);
    const Var vh = SliceCols(v, h * d, (h + 1) * d);
    const Var a = ScaledSoftmaxRows(MatMulNT(qh, kh), scale, valid_len);
    out.attention.push_back(a);
    contexts.push_back(MatMul(a, vh));
  }
  out.out = Linear(heads == 1 ? contexts[0] : ConcatCols(contexts), p, prefix + ".o");
  return out;
}

AttentionOutput EncoderBlock(Var e_in, const BoundParams& p, int block,
                             const SaEendConfig& config, std::size_t valid_len) {
  const std::string pre = BlockName(block);
  const Var e_bar = LayerNorm(e_in, p[pre + ".ln1.gain"], p[pre + ".ln1.bias"]);
  AttentionOutput sa = MultiHeadSelfAttention(e_bar, p, pre, config.heads, valid_len);
  const Var s = config.residual ? Add(e_bar, sa.out) : sa.out;
  const Var e_sa = LayerNorm(s, p[pre + ".ln2.gain"], p[pre + ".ln2.bias"]);
  const Var ff = Linear(Relu(Linear(e_sa, p, pre + ".ff1")), p, pre + ".ff2");
  sa.out = config.residual ? Add(e_sa, ff) : ff;
  return sa;
}

SaEendOutput SaEendForward(Var x, const BoundParams& p, const SaEendConfig& config,
                           std::size_t valid_len) {
  RequireInput(x, config.in_dim);
  SaEendOutput out;
  Var e = Linear(x, p, "input");
  for (int b = 0; b < config.blocks; ++b) {
    AttentionOutput block = EncoderBlock(e, p, b, config, valid_len);
    e = block.out;
    out.attention.push_back(std::move(block.attention));
  }
  const Var e_bar = LayerNorm(e, p["output.ln.gain"], p["output.ln.bias"]);
  out.z = Sigmoid(Linear(e_bar, p, "output"));
  return out;
}

Var BlstmLayer(Var x, const BoundParams& p, const std::string& prefix, std::size_t valid_len) {
  const Var fwd = Lstm(x, p[prefix + ".fwd.wi"], p[prefix + ".fwd.wh"], p[prefix + ".fwd.b"],
                       false, valid_len);
  const Var bwd = Lstm(x, p[prefix + ".bwd.wi"], p[prefix + ".bwd.wh"], p[prefix + ".bwd.b"],
                       true, valid_len);
  const Var both[] = {fwd, bwd};
  return ConcatCols(both);
}

BlstmOutput BlstmForward(Var x, const BoundParams& p, const BlstmConfig& config,
                         std::size_t valid_len) {
  RequireInput(x, config.in_dim);
  BlstmOutput out;
  Var h = x;
  for (int l = 0; l < config.layers; ++l) {
    h = BlstmLayer(h, p, LayerName(l), valid_len);
    if (l + 1 == config.dc_layer) {
      out.embeddings = L2NormalizeRows(Tanh(Linear(h, p, "dc")));
    }
  }
  out.z = Sigmoid(Linear(h, p, "output"));
  return out;
}

ModelOutput Forward(const ModelConfig& config, Var x, const BoundParams& p,
                    std::size_t valid_len) {
  ModelOutput out;
  if (config.arch == Architecture::kSaEend) {
    SaEendOutput sa = SaEendForward(x, p, config.sa, valid_len);
    out.z = sa.z;
    out.attention = std::move(sa.attention);
  } else {
    BlstmOutput bl = BlstmForward(x, p, config.blstm, valid_len);
    out.z = bl.z;
    out.embeddings = bl.embeddings;
  }
  return out;
}

Tensor Posteriors(const Model& model, const Tensor& features) {
  Graph g(false);
  BoundParams b(g, model.params);
  return Forward(model.config, g.Constant(features), b).z.value();
}

std::vector<unsigned char> EncodeModel(const Model& model) {
  Writer w;
  w.PutBytes("EEND");
  w.Put<std::uint16_t>(kModelFormatVersion);
  const std::string text = model.config.ToText();
  w.Put<std::uint64_t>(text.size());
  w.PutBytes(text);
  w.PutParams(model.params);
  return w.Take();
}

Model DecodeModel(const std::vector<unsigned char>& bytes) {
  Reader r(bytes);
  if (r.GetString(4, "magic") != "EEND") throw FormatError("not an EEND parameter file (magic)");
  const auto version = r.Get<std::uint16_t>("version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported parameter file version " + std::to_string(version));
  }
  const auto text_len = r.Get<std::uint64_t>("config length");
  Model m;
  m.config = ModelConfig::FromText(r.GetString(text_len, "config"));
  m.params = r.GetParams();
  if (!r.done()) throw FormatError("trailing bytes after the last tensor record");
  CheckParamLayout(m.config, m.params);
  return m;
}

void SaveModel(const Model& model, const std::string& path) {
  const auto bytes = EncodeModel(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

Model LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open parameter file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return DecodeModel(bytes);
  } catch (const ConfigMismatchError&) {
    throw;
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Model LoadModel(const std::string& path, const ModelConfig& expected) {
  Model m = LoadModel(path);
  if (!(m.config == expected)) {
    throw ConfigMismatchError(path + ": stored config\n" + m.config.ToText() +
                              "differs from the requested config\n" + expected.ToText());
  }
  return m;
}

}  // namespace eend
