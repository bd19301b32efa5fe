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

#include "eend/simulate.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "eend/dsp.h"
#include "eend/errors.h"
#include "eend/infer.h"
#include "eend/parallel.h"
#include "eend/rng.h"
#include "eend/score.h"

namespace eend {
namespace {

constexpr std::size_t kMinUtteranceSamples = 200;  // one 25 ms frame
constexpr double kUtteranceRms = 0.025;

void Normalize(std::vector<double>& x, double rms) {
  double e = 0;
  for (double v : x) e += v * v;
  e = std::sqrt(e / static_cast<double>(x.size()));
  if (e > 0) {
    for (double& v : x) v *= rms / e;
  }
}

std::vector<double> ColoredNoise(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double pole = rng.Uniform(0.0, 0.95);
  const double tilt = rng.Uniform(0.0, 1.0);
  std::vector<double> out(n);
  double lp = 0, prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.Normal();
    lp = pole * lp + (1 - pole) * w;
    // Blend of low-passed and first-difference (bright) components.
    out[i] = lp + tilt * 0.5 * (w - prev);
    prev = w;
  }
  Normalize(out, 1.0);
  return out;
}

std::vector<double> RoomResponse(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double tail = rng.Uniform(0.2, 0.6);
  std::vector<double> h(n);
  h[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    // 60 dB of decay over the response length.
    const double decay = std::exp(-6.9 * static_cast<double>(i) / static_cast<double>(n));
    h[i] = tail * rng.Uniform(-1.0, 1.0) * decay;
  }
  double peak = 0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  for (double& v : h) v /= peak;
  return h;
}

}  // namespace

std::vector<double> SynthesizeUtterance(const SpeakerProfile& profile,
                                        std::size_t num_samples,
                                        std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double sr = kSampleRate;
  std::vector<double> out(num_samples, 0.0);
  const double vib_rate = rng.Uniform(0.5, 2.0);
  const double vib_phase = rng.Uniform(0.0, 2 * M_PI);
  const double glide = rng.Uniform(-0.08, 0.08);
  std::vector<double> env(num_samples, 0.0);
  std::vector<std::size_t> syllable_of(num_samples, 0);
  std::vector<double> scale_of_syllable;

  // Syllables: smooth bumps of 120-300 ms with short gaps between them.
  std::size_t pos = 0;
  while (pos < num_samples) {
    const auto len = static_cast<std::size_t>(rng.Uniform(0.12, 0.30) * sr);
    const double gain = rng.Uniform(0.5, 1.0);
    scale_of_syllable.push_back(rng.Uniform(0.95, 1.05));
    const std::size_t end = std::min(num_samples, pos + len);
    for (std::size_t i = pos; i < end; ++i) {
      const double x = static_cast<double>(i - pos + 1) / static_cast<double>(len + 1);
      env[i] = gain * std::sqrt(std::sin(M_PI * x));
      syllable_of[i] = scale_of_syllable.size() - 1;
    }
    pos = end + static_cast<std::size_t>(rng.Uniform(0.0, 0.04) * sr);
  }

  // Harmonic weights per syllable: resonances shifted by the syllable's
  // formant scale, spectral tilt from the profile.
  const double nyquist_guard = 0.475 * sr;
  const std::size_t max_k =
      static_cast<std::size_t>(nyquist_guard / (profile.f0 * 0.85)) + 1;
  std::vector<std::vector<double>> weights(scale_of_syllable.size(),
                                           std::vector<double>(max_k + 1, 0.0));
  for (std::size_t s = 0; s < scale_of_syllable.size(); ++s) {
    for (std::size_t k = 1; k <= max_k; ++k) {
      const double f = profile.f0 * static_cast<double>(k);
      double a = 0;
      for (std::size_t j = 0; j < profile.formants.size(); ++j) {
        const double d = (f - profile.formants[j] * scale_of_syllable[s]) /
                         profile.bandwidths[j];
        a += 1.0 / (1.0 + d * d);
      }
      weights[s][k] = (0.05 + a) * std::pow(static_cast<double>(k), -profile.tilt);
    }
  }

  double phase = 0;
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double f0 = profile.f0 * (1.0 + 0.04 * std::sin(2 * M_PI * vib_rate * t + vib_phase) +
                                    glide * t / (static_cast<double>(num_samples) / sr));
    phase += 2 * M_PI * f0 / sr;
    if (phase > 2 * M_PI) phase -= 2 * M_PI;
    if (env[i] == 0.0) continue;
    const auto& w = weights[syllable_of[i]];
    // sin(k * phase) by the Chebyshev recurrence.
    const double two_cos = 2 * std::cos(phase);
    double s_prev = 0, s_cur = std::sin(phase), v = 0;
    for (std::size_t k = 1; k <= max_k && f0 * static_cast<double>(k) < nyquist_guard; ++k) {
      v += w[k] * s_cur;
      const double next = two_cos * s_cur - s_prev;
      s_prev = s_cur;
      s_cur = next;
    }
    out[i] = env[i] * v;
  }
  // A little breath noise keeps the spectrum from being purely harmonic.
  for (std::size_t i = 0; i < num_samples; ++i) out[i] += 0.002 * env[i] * rng.Normal();
  Normalize(out, kUtteranceRms * std::pow(10.0, rng.Uniform(-3.0, 3.0) / 20.0));
  return out;
}

void CorpusOptions::Validate() const {
  if (n_speakers < 1 || utt_per_speaker < 1 || n_noises < 1 || n_rirs < 1) {
    throw ParameterError("corpus counts (speakers, utterances, noises, rirs) must be >= 1");
  }
  if (!(utt_min_dur * kSampleRate >= kMinUtteranceSamples) ||
      !(utt_max_dur >= utt_min_dur)) {
    throw ParameterError("utterance duration range [" + std::to_string(utt_min_dur) +
                         ", " + std::to_string(utt_max_dur) +
                         "] is degenerate (min must be >= 0.025 s and <= max)");
  }
  if (!(noise_dur * kSampleRate >= 1) || !(rir_min_dur * kSampleRate >= 1) ||
      !(rir_max_dur >= rir_min_dur)) {
    throw ParameterError("noise or RIR duration range is degenerate");
  }
}

Corpus GenerateCorpus(const CorpusOptions& o) {
  o.Validate();
  Corpus corpus;
  SplitMix64 rng(DeriveSeed(o.seed, 1));

  // f0 slots 12 Hz apart with +-1 Hz jitter keep every pair >= 10 Hz apart.
  const std::size_t slots = std::max<std::size_t>(o.n_speakers, 20);
  std::vector<std::size_t> order(slots);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  for (int s = 0; s < o.n_speakers; ++s) {
    SpeakerProfile p;
    p.id = s;
    p.f0 = 85.0 + 12.0 * static_cast<double>(order[s]) + rng.Uniform(-1.0, 1.0);
    p.formants = {rng.Uniform(300, 900), rng.Uniform(900, 2300), rng.Uniform(2300, 3500)};
    p.bandwidths = {rng.Uniform(60, 140), rng.Uniform(90, 200), rng.Uniform(120, 260)};
    p.tilt = rng.Uniform(0.3, 1.2);
    corpus.speakers.push_back(p);
  }
  corpus.utterances.resize(o.n_speakers);
  for (int s = 0; s < o.n_speakers; ++s) {
    for (int u = 0; u < o.utt_per_speaker; ++u) {
      const std::uint64_t seed = DeriveSeed(
          o.seed, 0x10000 + static_cast<std::uint64_t>(s) * o.utt_per_speaker + u);
      SplitMix64 len_rng(seed);
      const auto n = static_cast<std::size_t>(
          std::lround(len_rng.Uniform(o.utt_min_dur, o.utt_max_dur) * kSampleRate));
      corpus.utterances[s].push_back(
          SynthesizeUtterance(corpus.speakers[s], n, len_rng.Next()));
    }
  }
  for (int n = 0; n < o.n_noises; ++n) {
    corpus.noises.push_back(ColoredNoise(
        static_cast<std::size_t>(o.noise_dur * kSampleRate), DeriveSeed(o.seed, 0x20000 + n)));
  }
  for (int r = 0; r < o.n_rirs; ++r) {
    SplitMix64 len_rng(DeriveSeed(o.seed, 0x30000 + r));
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::round(len_rng.Uniform(o.rir_min_dur, o.rir_max_dur) * kSampleRate)));
    corpus.rirs.push_back(RoomResponse(n, len_rng.Next()));
  }
  return corpus;
}

void MixtureSpec::Validate() const {
  if (n_spk < 1) throw ParameterError("n_spk must be >= 1, got " + std::to_string(n_spk));
  if (n_umin < 1 || n_umax < n_umin) {
    throw ParameterError("utterance counts need 1 <= n_umin <= n_umax, got " +
                         std::to_string(n_umin) + ", " + std::to_string(n_umax));
  }
  if (!(beta > 0) || !std::isfinite(beta)) {
    throw ParameterError("beta must be positive, got " + std::to_string(beta));
  }
  if (snr_choices.empty()) throw ParameterError("snr_choices is empty");
  for (double r : snr_choices) {
    if (std::isnan(r) || r == -kNoNoise) throw ParameterError("snr choice is not a number");
  }
}

MixturePlan PlanMixture(const MixtureSpec& spec, const Corpus& corpus) {
  spec.Validate();
  if (corpus.speakers.size() < static_cast<std::size_t>(spec.n_spk)) {
    throw CapacityError("corpus has " + std::to_string(corpus.speakers.size()) +
                        " speakers, mixture needs " + std::to_string(spec.n_spk));
  }
  SplitMix64 rng(spec.seed);
  MixturePlan plan;
  plan.spec = spec;
  std::vector<std::size_t> pool(corpus.speakers.size());
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < spec.n_spk; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.UniformInt(i, static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
    plan.speakers.push_back(pool[i]);
  }
  for (std::size_t slot = 0; slot < plan.speakers.size(); ++slot) {
    const auto& utts = corpus.utterances[plan.speakers[slot]];
    const std::size_t rir = static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(corpus.rirs.size()) - 1));
    plan.rirs.push_back(rir);
    const std::size_t rir_len = spec.use_rir ? corpus.rirs[rir].size() : 1;
    const auto count = static_cast<std::size_t>(rng.UniformInt(spec.n_umin, spec.n_umax));
    if (utts.size() < static_cast<std::size_t>(spec.n_umax)) {
      throw CapacityError("speaker " + std::to_string(plan.speakers[slot]) + " has " +
                          std::to_string(utts.size()) + " utterances, mixture needs up to " +
                          std::to_string(spec.n_umax));
    }
    const auto offset = static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(utts.size()) - 1));
    std::size_t pos = 0;
    for (std::size_t u = 0; u < count; ++u) {
      const double gap = rng.Exponential(spec.beta);
      pos += static_cast<std::size_t>(std::llround(gap * kSampleRate));
      ScheduledUtterance s;
      s.slot = slot;
      s.utterance = (offset + u) % utts.size();
      s.start = pos;
      s.length = utts[s.utterance].size();
      plan.utterances.push_back(s);
      pos += s.length + rir_len - 1;
    }
    plan.track_lengths.push_back(pos);
    plan.length = std::max(plan.length, pos);
  }
  plan.noise = static_cast<std::size_t>(
      rng.UniformInt(0, static_cast<std::int64_t>(corpus.noises.size()) - 1));
  plan.snr = spec.snr_choices[static_cast<std::size_t>(
      rng.UniformInt(0, static_cast<std::int64_t>(spec.snr_choices.size()) - 1))];
  return plan;
}

LabelSequence PlanLabels(const MixturePlan& plan) {
  const std::size_t frames = NumFrames(plan.length, 200, kLabelShift);
  LabelSequence labels(frames, plan.speakers.size(), 0.01);
  for (const auto& u : plan.utterances) {
    const std::size_t begin = u.start, end = u.start + u.length;
    const std::size_t first = begin / kLabelShift;
    const std::size_t last = std::min(frames, (end + kLabelShift - 1) / kLabelShift);
    for (std::size_t t = first; t < last; ++t) {
      const std::size_t lo = std::max(begin, t * kLabelShift);
      const std::size_t hi = std::min(end, (t + 1) * kLabelShift);
      if (hi > lo && hi - lo >= kLabelMinOccupancy) labels.set(t, u.slot, true);
    }
  }
  return labels;
}

Mixture RenderMixture(const MixturePlan& plan, const Corpus& corpus) {
  std::vector<std::vector<double>> tracks(plan.speakers.size(),
                                          std::vector<double>(plan.length, 0.0));
  for (const auto& u : plan.utterances) {
    const auto& dry = corpus.utterances[plan.speakers[u.slot]][u.utterance];
    std::vector<double> wet;
    if (plan.spec.use_rir) {
      wet = Convolve(dry, corpus.rirs[plan.rirs[u.slot]]);
    } else {
      wet = dry;
    }
    std::copy(wet.begin(), wet.end(), tracks[u.slot].begin() + static_cast<std::ptrdiff_t>(u.start));
  }
  Mixture m;
  m.wave.samples.assign(plan.length, 0.0);
  for (const auto& track : tracks)
    for (std::size_t i = 0; i < plan.length; ++i) m.wave.samples[i] += track[i];

  if (std::isfinite(plan.snr)) {
    // Speech and noise power over speech-active samples only.
    std::vector<bool> active(plan.length, false);
    for (const auto& u : plan.utterances)
      std::fill(active.begin() + static_cast<std::ptrdiff_t>(u.start),
                active.begin() + static_cast<std::ptrdiff_t>(u.start + u.length), true);
    const auto& noise = corpus.noises[plan.noise];
    double ps = 0, pn = 0;
    for (std::size_t i = 0; i < plan.length; ++i) {
      if (!active[i]) continue;
      const double n = noise[i % noise.size()];
      ps += m.wave.samples[i] * m.wave.samples[i];
      pn += n * n;
    }
    if (pn > 0 && ps > 0) {
      const double p = std::sqrt(ps / (pn * std::pow(10.0, plan.snr / 10.0)));
      for (std::size_t i = 0; i < plan.length; ++i)
        m.wave.samples[i] += p * noise[i % noise.size()];
    }
  }
  m.labels = PlanLabels(plan);
  for (std::size_t s : plan.speakers) m.speakers.push_back(corpus.speakers[s].id);
  m.utterances = plan.utterances;
  m.beta = plan.spec.beta;
  m.snr = plan.snr;
  m.seed = plan.spec.seed;
  return m;
}

Mixture SimulateMixture(const MixtureSpec& spec, const Corpus& corpus) {
  return RenderMixture(PlanMixture(spec, corpus), corpus);
}

double OverlapRatio(const LabelSequence& labels) {
  std::size_t speech = 0, overlap = 0;
  for (std::size_t t = 0; t < labels.num_frames(); ++t) {
    const std::size_t n = labels.RowSum(t);
    speech += n >= 1;
    overlap += n >= 2;
  }
  return speech == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(speech);
}

LabelSequence SubsampleLabels(const LabelSequence& labels, int factor) {
  const auto idx = SubsampleIndices(labels.num_frames(), factor);
  LabelSequence out(idx.size(), labels.num_speakers(), labels.frame_period() * factor);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t c = 0; c < labels.num_speakers(); ++c) out.set(i, c, labels(idx[i], c));
  return out;
}

namespace {

std::string SpeakerName(int id) {
  std::ostringstream s;
  s << "spk" << id;
  return s.str();
}

}  // namespace

std::vector<Mixture> SimulateMixtures(const MixtureSpec& spec, const Corpus& corpus,
                                      std::size_t first, std::size_t count, int jobs) {
  spec.Validate();
  std::vector<Mixture> mixtures(count);
  ParallelFor(count, jobs, [&](std::size_t k) {
    MixtureSpec s = spec;
    s.seed = DeriveSeed(spec.seed, first + k);
    mixtures[k] = SimulateMixture(s, corpus);
  });
  return mixtures;
}

std::string MixtureId(std::size_t index) {
  std::ostringstream s;
  s << "mix" << std::setw(6) << std::setfill('0') << index;
  return s.str();
}

struct MixtureSetWriter::State {
  std::filesystem::path dir;
  std::ofstream meta;
  std::vector<RttmRecord> rttm;
  std::set<std::string> ids;
  bool finished = false;
};

MixtureSetWriter::MixtureSetWriter(const std::string& dir) : state_(std::make_unique<State>()) {
  namespace fs = std::filesystem;
  state_->dir = dir;
  fs::create_directories(state_->dir / "wav");
  state_->meta.open(state_->dir / "meta.jsonl", std::ios::trunc);
  if (!state_->meta) throw FormatError("cannot write " + (state_->dir / "meta.jsonl").string());
}

MixtureSetWriter::~MixtureSetWriter() = default;

void MixtureSetWriter::Add(const std::string& id, const Mixture& m) {
  if (state_->finished) throw ContractError("MixtureSetWriter: Add after Finish");
  if (!state_->ids.insert(id).second) {
    throw ContractError("MixtureSetWriter: duplicate mixture id " + id);
  }
  WriteWav((state_->dir / "wav" / (id + ".wav")).string(), m.wave);
  std::vector<std::string> names;
  for (int spk : m.speakers) names.push_back(SpeakerName(spk));
  const auto recs = ToRttm(FramesToSegments(m.labels, id), names);
  state_->rttm.insert(state_->rttm.end(), recs.begin(), recs.end());
  nlohmann::json j;
  j["id"] = id;
  j["seed"] = m.seed;
  j["beta"] = m.beta;
  if (std::isfinite(m.snr)) {
    j["snr"] = m.snr;
  } else {
    j["snr"] = "inf";
  }
  j["speakers"] = names;
  j["overlap_ratio"] = OverlapRatio(m.labels);
  j["num_samples"] = m.wave.samples.size();
  state_->meta << j.dump() << "\n";
  if (!state_->meta) throw FormatError("failed writing " + (state_->dir / "meta.jsonl").string());
}

void MixtureSetWriter::Finish() {
  if (state_->finished) return;
  state_->meta.close();
  WriteRttm((state_->dir / "ref.rttm").string(), state_->rttm);
  state_->finished = true;
}

void WriteMixtureSet(const std::string& dir, const std::vector<Mixture>& mixtures,
                     const std::vector<std::string>& ids) {
  if (mixtures.size() != ids.size()) {
    throw ContractError("WriteMixtureSet: " + std::to_string(mixtures.size()) +
                        " mixtures but " + std::to_string(ids.size()) + " ids");
  }
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    throw ContractError("WriteMixtureSet: duplicate mixture ids");
  }
  MixtureSetWriter writer(dir);
  for (std::size_t i = 0; i < mixtures.size(); ++i) writer.Add(ids[i], mixtures[i]);
  writer.Finish();
}

std::vector<Recording> ReadMixtureSet(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path meta_path = fs::path(dir) / "meta.jsonl";
  std::ifstream meta(meta_path);
  if (!meta) throw FormatError("cannot open " + meta_path.string());
  const auto rttm = ReadRttm((fs::path(dir) / "ref.rttm").string());
  std::vector<Recording> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(meta, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(meta_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("speakers")) {
      throw FormatError(meta_path.string() + ":" + std::to_string(line_no) +
                        ": record needs 'id' and 'speakers'");
    }
    Recording r;
    r.id = j["id"].get<std::string>();
    r.wave = ReadWav((fs::path(dir) / "wav" / (r.id + ".wav")).string());
    const auto speakers = j["speakers"].get<std::vector<std::string>>();
    r.labels = Rasterize(rttm, r.id, speakers, 0.01,
                         NumFrames(r.wave.samples.size(), 200, kLabelShift));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace eend
