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

#include "eend/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "eend/errors.h"

namespace eend {

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), values_(ShapeSize(shape_), fill) {
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           ShapeString(shape_));
    }
  }
}

Tensor::Tensor(Shape shape, std::vector<Real> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           ShapeString(shape_));
    }
  }
  if (values_.size() != ShapeSize(shape_)) {
    throw DimensionError("shape " + ShapeString(shape_) + " needs " +
                         std::to_string(ShapeSize(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Tensor Tensor::Scalar(Real value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::Vector(std::initializer_list<Real> values) {
  return Tensor(Shape{values.size()}, std::vector<Real>(values));
}

Tensor Tensor::Matrix(
    std::initializer_list<std::initializer_list<Real>> rows) {
  std::vector<Real> values;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Tensor(Shape{rows.size(), cols}, std::move(values));
}

Tensor Tensor::Identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1;
  return t;
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ContractError("rows() on " + ShapeString(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ContractError("cols() on " + ShapeString(shape_));
  return shape_[1];
}

Real Tensor::item() const {
  if (values_.size() != 1) {
    throw ContractError("item() on non-scalar " + ShapeString(shape_));
  }
  return values_[0];
}

void Tensor::Fill(Real value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](Real v) { return std::isfinite(v); });
}

void Tensor::CheckFinite(std::string_view what) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError(std::string(what) + ": non-finite value at flat index " +
                         std::to_string(i) + " of " + ShapeString(shape_));
    }
  }
}

void RequireMatrix(const Tensor& t, std::string_view op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         ShapeString(t.shape()));
  }
}

namespace kernels {

namespace {

void CheckOut(Tensor* c, std::size_t m, std::size_t n, bool accumulate,
              std::string_view op) {
  if (accumulate) {
    if (c->rank() != 2 || c->rows() != m || c->cols() != n) {
      throw DimensionError(std::string(op) + ": accumulator shape " +
                           ShapeString(c->shape()));
    }
  } else if (c->rank() != 2 || c->rows() != m || c->cols() != n) {
    *c = Tensor({m, n});
  } else {
    c->Fill(0);
  }
}

// Every c(i,j) accumulates a(i,p) * b(p,j) for p = 0..K-1 in order, so
// the result equals the textbook triple loop bit for bit. Tiles of kRowTile
// rows by kColTile columns are held in local accumulators across the whole
// p loop; edge tiles take the same path with shorter extents.
constexpr std::size_t kRowTile = 4;
constexpr std::size_t kColTile = 16;

template <bool kTrans>
inline Real AElem(const Real* a, std::size_t lda, std::size_t i, std::size_t p) {
  return kTrans ? a[p * lda + i] : a[i * lda + p];
}

// Eight doubles per lane group; the compiler maps this onto whatever
// vector width the target has. Loads and stores go through memcpy, so no
// alignment is assumed.
typedef Real Lane __attribute__((vector_size(8 * sizeof(Real))));
constexpr std::size_t kLaneWidth = 8;
static_assert(kColTile % kLaneWidth == 0);

// The lane helpers and FullTile are internal and inlined, so the vector ABI
// note GCC emits for non-AVX-512 targets does not apply.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wpsabi"
inline Lane LoadLane(const Real* p) {
  Lane v;
  std::memcpy(&v, p, sizeof(Lane));
  return v;
}

inline void StoreLane(Real* p, const Lane& v) { std::memcpy(p, &v, sizeof(Lane)); }

template <bool kTrans>
void FullTile(const Real* a, std::size_t lda, const Real* b, std::size_t i0, std::size_t j0,
              std::size_t k, std::size_t n, Real* c) {
  Real* c0 = c + i0 * n + j0;
  Lane acc00 = LoadLane(c0), acc01 = LoadLane(c0 + 8);
  Lane acc10 = LoadLane(c0 + n), acc11 = LoadLane(c0 + n + 8);
  Lane acc20 = LoadLane(c0 + 2 * n), acc21 = LoadLane(c0 + 2 * n + 8);
  Lane acc30 = LoadLane(c0 + 3 * n), acc31 = LoadLane(c0 + 3 * n + 8);
  for (std::size_t p = 0; p < k; ++p) {
    const Real* bp = b + p * n + j0;
    const Lane b0 = LoadLane(bp), b1 = LoadLane(bp + 8);
    const Real a0 = AElem<kTrans>(a, lda, i0, p);
    const Real a1 = AElem<kTrans>(a, lda, i0 + 1, p);
    const Real a2 = AElem<kTrans>(a, lda, i0 + 2, p);
    const Real a3 = AElem<kTrans>(a, lda, i0 + 3, p);
    acc00 += a0 * b0;
    acc01 += a0 * b1;
    acc10 += a1 * b0;
    acc11 += a1 * b1;
    acc20 += a2 * b0;
    acc21 += a2 * b1;
    acc30 += a3 * b0;
    acc31 += a3 * b1;
  }
  StoreLane(c0, acc00);
  StoreLane(c0 + 8, acc01);
  StoreLane(c0 + n, acc10);
  StoreLane(c0 + n + 8, acc11);
  StoreLane(c0 + 2 * n, acc20);
  StoreLane(c0 + 2 * n + 8, acc21);
  StoreLane(c0 + 3 * n, acc30);
  StoreLane(c0 + 3 * n + 8, acc31);
}
#pragma GCC diagnostic pop

template <bool kTrans>
void EdgeTile(const Real* a, std::size_t lda, const Real* b, std::size_t i0, std::size_t i1,
              std::size_t j0, std::size_t j1, std::size_t k, std::size_t n, Real* c) {
  for (std::size_t i = i0; i < i1; ++i) {
    Real* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const Real aip = AElem<kTrans>(a, lda, i, p);
      const Real* bp = b + p * n;
      for (std::size_t j = j0; j < j1; ++j) ci[j] += aip * bp[j];
    }
  }
}

template <bool kTrans>
void GemmTiled(const Real* a, std::size_t lda, const Real* b, std::size_t m, std::size_t k,
               std::size_t n, Real* c) {
  const std::size_t m_full = m - m % kRowTile;
  const std::size_t n_full = n - n % kColTile;
  for (std::size_t i0 = 0; i0 < m_full; i0 += kRowTile) {
    for (std::size_t j0 = 0; j0 < n_full; j0 += kColTile) FullTile<kTrans>(a, lda, b, i0, j0, k, n, c);
    if (n_full < n) EdgeTile<kTrans>(a, lda, b, i0, i0 + kRowTile, n_full, n, k, n, c);
  }
  if (m_full < m) EdgeTile<kTrans>(a, lda, b, m_full, m, 0, n, k, n, c);
}

void GemmRows(const Real* a, std::size_t lda, bool a_trans, const Real* b,
              std::size_t m, std::size_t k, std::size_t n, Real* c) {
  if (a_trans) {
    GemmTiled<true>(a, lda, b, m, k, n, c);
  } else {
    GemmTiled<false>(a, lda, b, m, k, n, c);
  }
}

}  // namespace

void Gemm(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate) {
  RequireMatrix(a, "matmul");
  RequireMatrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         ShapeString(a.shape()) + " x " +
                         ShapeString(b.shape()));
  }
  CheckOut(c, a.rows(), b.cols(), accumulate, "matmul");
  GemmRows(a.data(), a.cols(), false, b.data(), a.rows(), a.cols(), b.cols(),
           c->data());
}

void GemmTN(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate) {
  RequireMatrix(a, "matmul_tn");
  RequireMatrix(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dimensions differ, " +
                         ShapeString(a.shape()) + "^T x " +
                         ShapeString(b.shape()));
  }
  CheckOut(c, a.cols(), b.cols(), accumulate, "matmul_tn");
  GemmRows(a.data(), a.cols(), true, b.data(), a.cols(), a.rows(), b.cols(),
           c->data());
}

void GemmNT(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate) {
  RequireMatrix(a, "matmul_nt");
  RequireMatrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ, " +
                         ShapeString(a.shape()) + " x " +
                         ShapeString(b.shape()) + "^T");
  }
  Tensor bt = Transpose(b);
  CheckOut(c, a.rows(), b.rows(), accumulate, "matmul_nt");
  GemmRows(a.data(), a.cols(), false, bt.data(), a.rows(), a.cols(), b.rows(),
           c->data());
}

Tensor Transpose(const Tensor& a) {
  RequireMatrix(a, "transpose");
  Tensor t({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace kernels

}  // namespace eend
