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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "eend/dsp.h"
#include "eend/errors.h"

namespace eend {

void Waveform::Validate() const {
  if (sample_rate <= 0) {
    throw ParameterError("waveform sample_rate must be positive, got " +
                         std::to_string(sample_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw NumericError("waveform sample " + std::to_string(i) +
                         " is not finite");
    }
  }
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::size_t NumFrames(std::size_t num_samples, std::size_t frame_len,
                      std::size_t shift) {
  if (num_samples < frame_len) return 0;
  return (num_samples - frame_len) / shift + 1;
}

Tensor MelFilterbank(int n_mels, std::size_t fft_size, int sample_rate,
                     double low_freq, double high_freq) {
  if (n_mels < 1) throw ParameterError("n_mels must be >= 1");
  const double nyquist = sample_rate / 2.0;
  if (high_freq <= 0) high_freq = nyquist;
  if (!(low_freq >= 0 && low_freq < high_freq && high_freq <= nyquist)) {
    throw ParameterError("mel filterbank band [" + std::to_string(low_freq) +
                         ", " + std::to_string(high_freq) + "] is invalid");
  }
  const std::size_t bins = fft_size / 2 + 1;
  const double mel_lo = HzToMel(low_freq);
  const double mel_hi = HzToMel(high_freq);
  const double mel_step = (mel_hi - mel_lo) / (n_mels + 1);
  Tensor fb({static_cast<std::size_t>(n_mels), bins});
  for (int m = 0; m < n_mels; ++m) {
    const double left = mel_lo + m * mel_step;
    const double center = left + mel_step;
    const double right = center + mel_step;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel =
          HzToMel(static_cast<double>(k) * sample_rate / static_cast<double>(fft_size));
      double w = 0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

FeatureSequence LogMel(const Waveform& wave, const LogMelOptions& options) {
  wave.Validate();
  const auto frame_len = static_cast<std::size_t>(
      std::lround(options.frame_length * wave.sample_rate));
  const auto shift = static_cast<std::size_t>(
      std::lround(options.frame_shift * wave.sample_rate));
  if (frame_len == 0 || shift == 0) {
    throw ParameterError("frame length and shift must cover >= 1 sample");
  }
  const std::size_t frames = NumFrames(wave.samples.size(), frame_len, shift);
  if (frames == 0) {
    throw EmptyInputError("waveform of " + std::to_string(wave.samples.size()) +
                          " samples is shorter than one " +
                          std::to_string(frame_len) + "-sample frame");
  }
  const std::size_t fft_size = NextPowerOfTwo(frame_len);
  const std::size_t bins = fft_size / 2 + 1;
  const Tensor fb = MelFilterbank(options.n_mels, fft_size, wave.sample_rate,
                                  options.low_freq, options.high_freq);
  std::vector<double> window(frame_len);
  for (std::size_t n = 0; n < frame_len; ++n) {
    window[n] = frame_len == 1
                    ? 1.0
                    : 0.5 - 0.5 * std::cos(2 * M_PI * static_cast<double>(n) /
                                           static_cast<double>(frame_len - 1));
  }

  FeatureSequence out;
  out.frame_period = options.frame_shift;
  out.frames = Tensor({frames, static_cast<std::size_t>(options.n_mels)});
  std::vector<std::complex<double>> buf(fft_size);
  std::vector<double> power(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* x = wave.samples.data() + t * shift;
    for (std::size_t n = 0; n < fft_size; ++n)
      buf[n] = n < frame_len ? x[n] * window[n] : 0.0;
    Fft(buf);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    for (int m = 0; m < options.n_mels; ++m) {
      double e = 0;
      for (std::size_t k = 0; k < bins; ++k) e += fb(m, k) * power[k];
      out.frames(t, m) = std::log(std::max(e, options.power_floor));
    }
  }
  return out;
}

FeatureSequence Splice(const FeatureSequence& f, int left, int right) {
  if (left < 0 || right < 0) throw ParameterError("splice context must be >= 0");
  const std::size_t frames = f.num_frames(), dim = f.dim();
  const std::size_t width = static_cast<std::size_t>(left + right + 1);
  FeatureSequence out;
  out.frame_period = f.frame_period;
  out.frames = Tensor({frames, width * dim});
  const auto last = static_cast<std::int64_t>(frames) - 1;
  for (std::size_t t = 0; t < frames; ++t) {
    for (int o = -left; o <= right; ++o) {
      const std::int64_t src =
          std::clamp<std::int64_t>(static_cast<std::int64_t>(t) + o, 0, last);
      const auto row = f.frames.row(static_cast<std::size_t>(src));
      std::copy(row.begin(), row.end(),
                out.frames.data() + t * width * dim +
                    static_cast<std::size_t>(o + left) * dim);
    }
  }
  return out;
}

std::vector<std::size_t> SubsampleIndices(std::size_t num_frames, int factor) {
  if (factor < 1) {
    throw ParameterError("subsampling factor must be >= 1, got " +
                         std::to_string(factor));
  }
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < num_frames; t += static_cast<std::size_t>(factor))
    idx.push_back(t);
  return idx;
}

FeatureSequence Subsample(const FeatureSequence& f, int factor) {
  const auto idx = SubsampleIndices(f.num_frames(), factor);
  FeatureSequence out;
  out.frame_period = f.frame_period * factor;
  out.frames = Tensor({idx.size(), f.dim()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto row = f.frames.row(idx[i]);
    std::copy(row.begin(), row.end(), out.frames.row(i).begin());
  }
  return out;
}

FeatureSequence ExtractFeatures(const Waveform& wave,
                                const FeatureOptions& options) {
  return Subsample(Splice(LogMel(wave, options.logmel), options.context_left,
                          options.context_right),
                   options.subsample);
}

namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void ExpectField(bool ok, const std::string& field, const std::string& detail) {
  if (!ok) throw FormatError("wav: unsupported " + field + " (" + detail + ")");
}

}  // namespace

Waveform ParseWav(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0) {
    throw FormatError("wav: missing RIFF header (chunk_id)");
  }
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("wav: RIFF form type is not WAVE (format)");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::uint32_t size = ReadU32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data") {
      throw FormatError("wav: chunk '" + id + "' overruns the file");
    }
    if (id == "fmt ") {
      ExpectField(size >= 16, "fmt chunk size", std::to_string(size));
      const unsigned char* f = bytes.data() + body;
      const std::uint16_t audio_format = ReadU16(f);
      const std::uint16_t channels = ReadU16(f + 2);
      const std::uint32_t rate = ReadU32(f + 4);
      const std::uint16_t bits = ReadU16(f + 14);
      ExpectField(audio_format == 1, "audio_format",
                  std::to_string(audio_format) + ", expected 1 (PCM)");
      ExpectField(channels == 1, "num_channels",
                  std::to_string(channels) + ", expected 1");
      ExpectField(rate == static_cast<std::uint32_t>(kSampleRate), "sample_rate",
                  std::to_string(rate) + ", expected 8000");
      ExpectField(bits == 16, "bits_per_sample",
                  std::to_string(bits) + ", expected 16");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (body + size > bytes.size()) {
        throw FormatError("wav: data chunk truncated (data_size " +
                          std::to_string(size) + ")");
      }
      ExpectField(size % 2 == 0, "data_size", "odd byte count");
      Waveform w;
      w.sample_rate = kSampleRate;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(have_fmt ? "wav: no data chunk" : "wav: no fmt chunk");
}

std::vector<unsigned char> EncodeWav(const Waveform& wave) {
  if (wave.sample_rate != kSampleRate) {
    throw FormatError("wav: sample_rate " + std::to_string(wave.sample_rate) +
                      " cannot be written, expected 8000");
  }
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, kSampleRate);
  PutU32(out, kSampleRate * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_bytes);
  for (double s : wave.samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return ParseWav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteWav(const std::string& path, const Waveform& wave) {
  const auto bytes = EncodeWav(wave);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("wav: cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace eend
