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

#ifndef EEND_DSP_H_
#define EEND_DSP_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eend {

std::size_t NextPowerOfTwo(std::size_t n);

// In-place iterative radix-2 FFT. The size must be a power of two. The
// inverse transform includes the 1/N factor.
void Fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Full linear convolution, length a.size() + b.size() - 1. Short kernels use
// the direct sum; longer ones go through the FFT.
std::vector<double> Convolve(std::span<const double> a,
                             std::span<const double> b);

}  // namespace eend

#endif  // EEND_DSP_H_
