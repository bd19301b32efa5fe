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

#include "eend/features.h"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "eend/dsp.h"
#include "eend/errors.h"
#include "eend/rng.h"

namespace eend {
namespace {

Waveform Tone(double hz, double seconds, double amp = 0.5) {
  Waveform w;
  const auto n = static_cast<std::size_t>(seconds * kSampleRate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2 * M_PI * hz * static_cast<double>(i) / kSampleRate);
  return w;
}

Waveform Noise(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = rng.Uniform(-0.5, 0.5);
  return w;
}

TEST(FftTest, MatchesDirectDft) {
  SplitMix64 rng(3);
  std::vector<std::complex<double>> x(16);
  for (auto& v : x) v = {rng.Uniform(-1, 1), rng.Uniform(-1, 1)};
  auto y = x;
  Fft(y);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::complex<double> s = 0;
    for (std::size_t n = 0; n < x.size(); ++n)
      s += x[n] * std::polar(1.0, -2 * M_PI * double(k * n) / 16.0);
    EXPECT_NEAR(std::abs(s - y[k]), 0.0, 1e-12);
  }
  Fft(y, true);
  for (std::size_t n = 0; n < x.size(); ++n)
    EXPECT_NEAR(std::abs(y[n] - x[n]), 0.0, 1e-14);
}

TEST(FftTest, RejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> x(12);
  EXPECT_THROW(Fft(x), ParameterError);
}

TEST(ConvolveTest, FftPathMatchesDirectSum) {
  SplitMix64 rng(5);
  std::vector<double> a(300), b(77);
  for (double& v : a) v = rng.Uniform(-1, 1);
  for (double& v : b) v = rng.Uniform(-1, 1);
  const auto c = Convolve(a, b);
  ASSERT_EQ(c.size(), 376u);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (n >= i && n - i < b.size()) s += a[i] * b[n - i];
    EXPECT_NEAR(c[n], s, 1e-10);
  }
}

TEST(ConvolveTest, UnitImpulseIsIdentity) {
  std::vector<double> h = {0.25, -1, 0.5};
  std::vector<double> d = {1};
  EXPECT_EQ(Convolve(d, h), h);
}

TEST(LogMelTest, OneSecondGivesNinetyEightFrames) {
  const auto f = LogMel(Tone(440, 1.0));
  EXPECT_EQ(f.num_frames(), 98u);
  EXPECT_EQ(f.dim(), 23u);
  EXPECT_DOUBLE_EQ(f.frame_period, 0.01);
}

TEST(LogMelTest, SilenceSitsOnTheFloor) {
  Waveform w;
  w.samples.assign(4000, 0.0);
  const auto f = LogMel(w);
  for (double v : f.frames.values()) EXPECT_EQ(v, std::log(1e-10));
}

TEST(LogMelTest, ToneEnergyPeaksInTheFilterCoveringIt) {
  // Filter whose triangle gives 1 kHz the largest weight, computed from the
  // mel formula directly.
  const double m_lo = 2595 * std::log10(1 + 20.0 / 700);
  const double m_hi = 2595 * std::log10(1 + 4000.0 / 700);
  const double m_tone = 2595 * std::log10(1 + 1000.0 / 700);
  const double step = (m_hi - m_lo) / 24;
  int expected = -1;
  double best = -1;
  for (int m = 0; m < 23; ++m) {
    const double c = m_lo + (m + 1) * step;
    const double w = 1 - std::abs(m_tone - c) / step;
    if (w > best) best = w, expected = m;
  }
  const auto f = LogMel(Tone(1000, 0.5));
  for (std::size_t t = 0; t < f.num_frames(); ++t) {
    int arg = 0;
    for (int m = 1; m < 23; ++m)
      if (f.frames(t, m) > f.frames(t, arg)) arg = m;
    EXPECT_EQ(arg, expected) << "frame " << t;
  }
}

TEST(LogMelTest, FrameCountSweep) {
  for (std::size_t n = 200; n < 1400; n += 7) {
    Waveform w = Noise(n, n);
    EXPECT_EQ(LogMel(w).num_frames(), (n - 200) / 80 + 1) << n;
  }
  EXPECT_EQ(NumFrames(199, 200, 80), 0u);
}

TEST(LogMelTest, ShortInputIsEmptyInputError) {
  Waveform w;
  w.samples.assign(199, 0.1);
  EXPECT_THROW(LogMel(w), EmptyInputError);
}

TEST(LogMelTest, NonFiniteSampleIsRejected) {
  Waveform w = Noise(400, 1);
  w.samples[17] = NAN;
  EXPECT_THROW(LogMel(w), NumericError);
}

TEST(LogMelTest, LouderNeverLowersAnyBin) {
  const Waveform w = Noise(2000, 9);
  const auto base = LogMel(w);
  for (double g : {2.0, 3.0, 10.0}) {
    Waveform louder = w;
    for (double& s : louder.samples) s *= g;
    const auto f = LogMel(louder);
    for (std::size_t i = 0; i < f.frames.size(); ++i)
      EXPECT_GE(f.frames[i], base.frames[i]);
  }
}

TEST(LogMelTest, FilterbankRowsArePeakNormalizedTriangles) {
  const Tensor fb = MelFilterbank(23, 256, 8000, 20, 0);
  ASSERT_EQ(fb.shape(), (Shape{23, 129}));
  for (std::size_t m = 0; m < 23; ++m) {
    double mx = 0;
    for (std::size_t k = 0; k < 129; ++k) {
      EXPECT_GE(fb(m, k), 0.0);
      EXPECT_LE(fb(m, k), 1.0);
      mx = std::max(mx, fb(m, k));
    }
    EXPECT_GT(mx, 0.0) << "empty filter " << m;
  }
}

TEST(SpliceTest, ZeroContextIsIdentity) {
  const auto f = LogMel(Noise(1000, 2));
  EXPECT_EQ(Splice(f, 0, 0).frames, f.frames);
}

TEST(SpliceTest, SevenSevenGives345WithEdgeReplication) {
  const auto f = LogMel(Noise(1600, 4));
  const auto s = Splice(f, 7, 7);
  ASSERT_EQ(s.dim(), 345u);
  ASSERT_EQ(s.num_frames(), f.num_frames());
  const std::size_t last = f.num_frames() - 1;
  for (std::size_t o = 0; o < 15; ++o) {
    for (std::size_t j = 0; j < 23; ++j) {
      const std::size_t lo = o < 7 ? 0 : o - 7;
      EXPECT_EQ(s.frames(0, o * 23 + j), f.frames(lo, j));
      EXPECT_EQ(s.frames(last, o * 23 + j), f.frames(std::min(last, last + o - 7), j));
    }
  }
  // Interior frame: centre block is the frame itself.
  for (std::size_t j = 0; j < 23; ++j) EXPECT_EQ(s.frames(9, 7 * 23 + j), f.frames(9, j));
}

TEST(SubsampleTest, IdentityAndCeil) {
  const auto f = LogMel(Tone(300, 1.0));
  EXPECT_EQ(Subsample(f, 1).frames, f.frames);
  const auto s = Subsample(f, 10);
  EXPECT_EQ(s.num_frames(), 10u);
  EXPECT_DOUBLE_EQ(s.frame_period, 0.1);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 23; ++j) EXPECT_EQ(s.frames(i, j), f.frames(10 * i, j));
  EXPECT_THROW(Subsample(f, 0), ParameterError);
  for (std::size_t t = 1; t < 60; ++t)
    EXPECT_EQ(SubsampleIndices(t, 7).size(), (t + 6) / 7);
}

TEST(ExtractFeaturesTest, DeterministicAndFinite) {
  const Waveform w = Noise(8000, 11);
  const auto a = ExtractFeatures(w);
  const auto b = ExtractFeatures(w);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.num_frames(), 10u);
  EXPECT_EQ(a.dim(), 345u);
  EXPECT_TRUE(a.frames.AllFinite());
}

TEST(WavTest, RoundTripsSixteenBitSamples) {
  Waveform w;
  for (int v : {0, 1, -1, 32767, -32768, 1234}) w.samples.push_back(v / 32768.0);
  const auto parsed = ParseWav(EncodeWav(w));
  EXPECT_EQ(parsed.samples, w.samples);
  EXPECT_EQ(parsed.sample_rate, 8000);

  const auto path = std::filesystem::temp_directory_path() / "eend_wav_test.wav";
  WriteWav(path.string(), w);
  EXPECT_EQ(ReadWav(path.string()).samples, w.samples);
  std::filesystem::remove(path);
}

void ExpectFormatErrorNaming(std::vector<unsigned char> bytes, const char* field) {
  try {
    ParseWav(bytes);
    FAIL() << "expected FormatError for " << field;
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

TEST(WavTest, UnsupportedLayoutsNameTheField) {
  Waveform w;
  w.samples.assign(10, 0.0);
  const auto good = EncodeWav(w);
  auto bad = good;
  bad[20] = 3;  // IEEE float
  ExpectFormatErrorNaming(bad, "audio_format");
  bad = good;
  bad[22] = 2;
  ExpectFormatErrorNaming(bad, "num_channels");
  bad = good;
  bad[24] = 0x44, bad[25] = 0xAC;  // 44100
  ExpectFormatErrorNaming(bad, "sample_rate");
  bad = good;
  bad[34] = 8;
  ExpectFormatErrorNaming(bad, "bits_per_sample");
  bad = good;
  bad[0] = 'X';
  ExpectFormatErrorNaming(bad, "RIFF");
  bad.assign(good.begin(), good.begin() + 50);
  ExpectFormatErrorNaming(bad, "data");
}

}  // namespace
}  // namespace eend
