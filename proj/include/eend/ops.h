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

// Differentiable primitives. Every function records one node on the graph
// owning its inputs. Only row-vector bias addition broadcasts.

#ifndef EEND_OPS_H_
#define EEND_OPS_H_

#include <cstddef>
#include <limits>
#include <span>

#include "eend/graph.h"

namespace eend {

inline constexpr Real kLayerNormEpsilon = 1e-12;
inline constexpr std::size_t kAllRows = std::numeric_limits<std::size_t>::max();

// [M x K] * [K x N]
Var MatMul(Var a, Var b);
// a * b^T
Var MatMulNT(Var a, Var b);
// a^T * b
Var MatMulTN(Var a, Var b);
// a + 1 * bias^T, bias of shape [N] for a of shape [M x N].
Var AddRowVector(Var a, Var bias);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// Hadamard product.
Var Mul(Var a, Var b);
Var Scale(Var a, Real factor);
Var AddConstant(Var a, Real constant);

enum class Activation { kSigmoid, kTanh, kRelu };

Var Elementwise(Activation op, Var a);
// Saturates at the closest representable values inside (0, 1), so
// posteriors never reach exactly 0 or 1.
inline Var Sigmoid(Var a) { return Elementwise(Activation::kSigmoid, a); }
inline Var Tanh(Var a) { return Elementwise(Activation::kTanh, a); }
inline Var Relu(Var a) { return Elementwise(Activation::kRelu, a); }

// Row-wise softmax of scale * a with max subtraction. Columns at index >=
// valid_cols are treated as masked keys: their weight is exactly zero.
Var ScaledSoftmaxRows(Var a, Real scale, std::size_t valid_cols = kAllRows);

// Per-row normalization to zero mean and unit (population) variance, with
// epsilon added to the variance, followed by per-column gain and bias.
Var LayerNorm(Var e, Var gain, Var bias, Real epsilon = kLayerNormEpsilon);

Var ConcatCols(std::span<const Var> parts);
Var SliceCols(Var a, std::size_t begin, std::size_t end);

// Rows >= valid_rows replaced by zero.
Var MaskRows(Var a, std::size_t valid_rows);
// Each row divided by its Euclidean norm (guarded below by 1e-12).
Var L2NormalizeRows(Var a);

// Sum of all values, as a scalar.
Var Sum(Var a);
// Sum of squared values, as a scalar.
Var SumSquares(Var a);

// Single-direction LSTM over the first valid_len rows of x [T x I].
// Gate blocks in w_input [I x 4H], w_hidden [H x 4H], bias [4H] are ordered
// input, forget, candidate, output. With reverse set the recurrence starts
// at row valid_len - 1. Output rows >= valid_len are zero.
Var Lstm(Var x, Var w_input, Var w_hidden, Var bias, bool reverse,
         std::size_t valid_len = kAllRows);

// Plain-tensor helpers shared by ops and tests.
Real SigmoidValue(Real x);
Tensor SoftmaxRowsValue(const Tensor& a, Real scale,
                        std::size_t valid_cols = kAllRows);

}  // namespace eend

#endif  // EEND_OPS_H_
