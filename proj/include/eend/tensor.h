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

#ifndef EEND_TENSOR_H_
#define EEND_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eend {

using Real = double;
using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);
std::size_t ShapeSize(const Shape& shape);

// Dense row-major array of Real. A rank-0 tensor (empty shape) holds one
// value and is used for scalar losses.
class Tensor {
 public:
  Tensor() : values_(1, Real{0}) {}
  explicit Tensor(Shape shape, Real fill = Real{0});
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor Scalar(Real value);
  static Tensor Vector(std::initializer_list<Real> values);
  // Rows given as nested lists; all rows must have equal length.
  static Tensor Matrix(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor Identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool is_scalar() const { return shape_.empty(); }

  // Rank-2 accessors. Calling these on other ranks is a ContractError.
  std::size_t rows() const;
  std::size_t cols() const;

  Real& operator()(std::size_t r, std::size_t c) {
    return values_[r * shape_[1] + c];
  }
  Real operator()(std::size_t r, std::size_t c) const {
    return values_[r * shape_[1] + c];
  }
  Real& operator[](std::size_t i) { return values_[i]; }
  Real operator[](std::size_t i) const { return values_[i]; }

  Real* data() { return values_.data(); }
  const Real* data() const { return values_.data(); }
  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }
  std::span<Real> row(std::size_t r) {
    return {values_.data() + r * shape_[1], shape_[1]};
  }
  std::span<const Real> row(std::size_t r) const {
    return {values_.data() + r * shape_[1], shape_[1]};
  }

  // The single value of a rank-0 or one-element tensor.
  Real item() const;

  void Fill(Real value);
  bool AllFinite() const;
  // Throws NumericError naming `what` when any value is NaN or infinite.
  void CheckFinite(std::string_view what) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<Real> values_;
};

// Throws DimensionError mentioning `op` unless `t` is rank 2.
void RequireMatrix(const Tensor& t, std::string_view op);

namespace kernels {

// c = a * b, or c += a * b when accumulate is set. Each output element is
// accumulated in increasing k order, so results match a naive triple loop.
void Gemm(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate);
// c (+)= a^T * b
void GemmTN(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate);
// c (+)= a * b^T
void GemmNT(const Tensor& a, const Tensor& b, Tensor* c, bool accumulate);
Tensor Transpose(const Tensor& a);

}  // namespace kernels

}  // namespace eend

#endif  // EEND_TENSOR_H_
