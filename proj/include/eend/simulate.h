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

// Synthetic speech corpus and diarization-style mixture simulation.
//
// A corpus holds speaker profiles with their utterance lists, background
// noises and room impulse responses. A mixture picks n_spk speakers and, for
// each, an RIR and an utterance count, then concatenates exponential(beta)
// silences and RIR-convolved utterances into one track per speaker. Tracks
// are zero-padded to the longest, summed, and background noise is tiled and
// mixed in at the sampled SNR.
//
// Seed protocol (keys for DeriveSeed):
//   corpus: profiles draw from DeriveSeed(seed, 1); utterance u of speaker s
//     from DeriveSeed(seed, 0x10000 + s * utt_per_speaker + u); noise n from
//     DeriveSeed(seed, 0x20000 + n); RIR r from DeriveSeed(seed, 0x30000 + r).
//   mixture set: mixture i uses DeriveSeed(global_seed, i).
//   mixture: a single stream seeded with MixtureSpec::seed, consumed in the
//     order speakers, then per speaker (RIR, count, start offset, silences),
//     then noise index and SNR.

#ifndef EEND_SIMULATE_H_
#define EEND_SIMULATE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "eend/features.h"
#include "eend/labels.h"

namespace eend {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();
// Label grid: 10 ms frames of 80 samples; a frame is active when at least
// half of it lies inside an utterance.
inline constexpr std::size_t kLabelShift = 80;
inline constexpr std::size_t kLabelMinOccupancy = 40;

struct SpeakerProfile {
  int id = 0;
  double f0 = 120.0;                     // Hz
  std::vector<double> formants;          // resonance centres, Hz
  std::vector<double> bandwidths;        // Hz, one per formant
  double tilt = 1.0;                     // harmonic k is scaled by k^-tilt
};

struct CorpusOptions {
  int n_speakers = 40;
  int utt_per_speaker = 20;
  double utt_min_dur = 1.5;  // seconds
  double utt_max_dur = 3.5;
  int n_noises = 6;
  double noise_dur = 4.0;
  int n_rirs = 16;
  double rir_min_dur = 0.05;
  double rir_max_dur = 0.25;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct Corpus {
  std::vector<SpeakerProfile> speakers;
  // utterances[s][u]: dry waveform of utterance u of speaker s.
  std::vector<std::vector<std::vector<double>>> utterances;
  std::vector<std::vector<double>> noises;
  std::vector<std::vector<double>> rirs;
};

// Throws ParameterError on counts < 1 or a degenerate duration range
// (utterances must be at least one 25 ms frame long).
Corpus GenerateCorpus(const CorpusOptions& options);

// Signature-driven voice: harmonics of a slowly wandering f0, weighted by
// the profile's resonances, cut into syllables with smooth envelopes.
std::vector<double> SynthesizeUtterance(const SpeakerProfile& profile,
                                        std::size_t num_samples,
                                        std::uint64_t seed);

struct MixtureSpec {
  int n_spk = 2;
  int n_umin = 10;
  int n_umax = 20;
  double beta = 2.0;  // mean silence before each utterance, seconds
  std::vector<double> snr_choices = {10.0, 15.0, 20.0};  // dB; kNoNoise ok
  bool use_rir = true;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct ScheduledUtterance {
  std::size_t slot = 0;      // speaker column in the mixture
  std::size_t utterance = 0;  // index into the speaker's utterance list
  std::size_t start = 0;      // first dry sample in the mixture
  std::size_t length = 0;     // dry length in samples
};

// Everything random about a mixture, fixed before any audio is rendered.
struct MixturePlan {
  MixtureSpec spec;
  std::vector<std::size_t> speakers;  // corpus speaker index per slot
  std::vector<std::size_t> rirs;      // corpus RIR index per slot (if used)
  std::vector<ScheduledUtterance> utterances;
  std::vector<std::size_t> track_lengths;
  std::size_t length = 0;  // samples
  std::size_t noise = 0;
  double snr = kNoNoise;
};

struct Mixture {
  Waveform wave;
  LabelSequence labels;
  std::vector<int> speakers;  // profile ids, one per label column
  std::vector<ScheduledUtterance> utterances;
  double beta = 0;
  double snr = kNoNoise;
  std::uint64_t seed = 0;
};

// Throws CapacityError when the corpus has fewer than n_spk speakers or a
// sampled speaker has fewer than n_umax utterances.
MixturePlan PlanMixture(const MixtureSpec& spec, const Corpus& corpus);
// Labels on the 10 ms grid with T = NumFrames(length, 200, 80), the frame
// count of the log-mel front end, so features and labels align.
LabelSequence PlanLabels(const MixturePlan& plan);
Mixture RenderMixture(const MixturePlan& plan, const Corpus& corpus);
Mixture SimulateMixture(const MixtureSpec& spec, const Corpus& corpus);

// Frames with >= 2 active speakers over frames with >= 1; 0 without speech.
double OverlapRatio(const LabelSequence& labels);

// Same frame selection as Subsample(); frame period scales by factor.
LabelSequence SubsampleLabels(const LabelSequence& labels, int factor = 10);

// Writes <dir>/wav/<id>.wav, <dir>/ref.rttm and <dir>/meta.jsonl (one JSON
// record per mixture: id, seed, beta, snr, speakers, overlap_ratio,
// num_samples). ids must be unique and parallel to mixtures.
void WriteMixtureSet(const std::string& dir,
                     const std::vector<Mixture>& mixtures,
                     const std::vector<std::string>& ids);

// Mixture i of a set is SimulateMixture with seed DeriveSeed(spec.seed, i).
// Returns mixtures first .. first + count - 1, rendered on up to `jobs`
// threads; the result does not depend on jobs.
std::vector<Mixture> SimulateMixtures(const MixtureSpec& spec, const Corpus& corpus,
                                      std::size_t first, std::size_t count, int jobs = 1);

// "mix" followed by the zero-padded six-digit index.
std::string MixtureId(std::size_t index);

// Streaming form of WriteMixtureSet: mixtures are written as they are added
// and ref.rttm on Finish. Duplicate ids are a ContractError.
class MixtureSetWriter {
 public:
  explicit MixtureSetWriter(const std::string& dir);
  ~MixtureSetWriter();
  MixtureSetWriter(const MixtureSetWriter&) = delete;
  MixtureSetWriter& operator=(const MixtureSetWriter&) = delete;

  void Add(const std::string& id, const Mixture& mixture);
  void Finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct Recording {
  std::string id;
  Waveform wave;
  LabelSequence labels;  // 10 ms grid, rasterized from the reference RTTM
};

// Reads a directory produced by WriteMixtureSet. Label frames follow the
// log-mel frame count of each waveform.
std::vector<Recording> ReadMixtureSet(const std::string& dir);

}  // namespace eend

#endif  // EEND_SIMULATE_H_
