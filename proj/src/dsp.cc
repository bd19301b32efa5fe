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

#include "eend/dsp.h"

#include <cmath>
#include <utility>

#include "eend/errors.h"

namespace eend {

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void Fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ParameterError("fft size must be a power of two, got " +
                         std::to_string(n));
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  // Twiddles for the largest stage; stage `len` uses every (n / len)-th.
  // Products are spelled out because std::complex multiplication goes
  // through the slow NaN-recovery path.
  thread_local std::size_t cached_n = 0;
  thread_local std::vector<double> wr, wi;
  if (cached_n != n) {
    wr.resize(n / 2);
    wi.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      wr[k] = std::cos(angle);
      wi[k] = std::sin(angle);
    }
    cached_n = n;
  }
  const double sign = inverse ? -1.0 : 1.0;
  auto* d = reinterpret_cast<double*>(data.data());
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2, stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double c = wr[k * stride], s = sign * wi[k * stride];
        double* u = d + 2 * (i + k);
        double* v = d + 2 * (i + k + half);
        const double vr = v[0] * c - v[1] * s;
        const double vi = v[0] * s + v[1] * c;
        v[0] = u[0] - vr;
        v[1] = u[1] - vi;
        u[0] += vr;
        u[1] += vi;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= static_cast<double>(n);
  }
}

std::vector<double> Convolve(std::span<const double> a,
                             std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  std::vector<double> out(out_len, 0.0);
  if (std::min(a.size(), b.size()) <= 32) {
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  const std::size_t n = NextPowerOfTwo(out_len);
  // Both real inputs share one forward transform: z = a + i b, then
  // A[k] = (Z[k] + conj(Z[-k])) / 2 and B[k] = (Z[k] - conj(Z[-k])) / 2i.
  std::vector<std::complex<double>> z(n), fa(n);
  for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) z[i].imag(b[i]);
  Fft(z);
  for (std::size_t k = 0; k < n; ++k) {
    const std::complex<double> zk = z[k], zm = std::conj(z[(n - k) & (n - 1)]);
    const double ar = 0.5 * (zk.real() + zm.real()), ai = 0.5 * (zk.imag() + zm.imag());
    const double br = 0.5 * (zk.imag() - zm.imag()), bi = -0.5 * (zk.real() - zm.real());
    fa[k] = {ar * br - ai * bi, ar * bi + ai * br};
  }
  Fft(fa, true);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace eend
