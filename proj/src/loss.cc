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

#include "eend/loss.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eend/errors.h"

namespace eend {
namespace {

void RequireLabels(const Tensor& z, const Tensor& labels, const char* op) {
  RequireMatrix(z, op);
  if (z.shape() != labels.shape()) {
    throw DimensionError(std::string(op) + ": posteriors " + ShapeString(z.shape()) +
                         " vs labels " + ShapeString(labels.shape()));
  }
}

std::size_t ValidRows(std::size_t requested, std::size_t rows) {
  const std::size_t n = requested == kAllRows ? rows : std::min(requested, rows);
  if (n == 0) throw EmptyInputError("loss over zero valid frames");
  return n;
}

}  // namespace

void LossConfig::Validate() const {
  if (!(alpha >= 0 && alpha <= 1)) {
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(bce_clip > 0 && bce_clip < 0.5)) {
    throw ParameterError("bce_clip must lie in (0, 0.5), got " + std::to_string(bce_clip));
  }
}

Real BceValue(const Tensor& z, const Tensor& labels, std::size_t valid_rows, Real clip) {
  RequireLabels(z, labels, "bce");
  const std::size_t rows = ValidRows(valid_rows, z.rows());
  const std::size_t n = rows * z.cols();
  Real s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Real p = std::clamp(z[k], clip, 1 - clip);
    s -= labels[k] * std::log(p) + (1 - labels[k]) * std::log(1 - p);
  }
  return s / static_cast<Real>(n);
}

Var Bce(Var z, const Tensor& labels, std::size_t valid_rows, Real clip) {
  const Tensor& zv = z.value();
  const Real value = BceValue(zv, labels, valid_rows, clip);
  const std::size_t n = ValidRows(valid_rows, zv.rows()) * zv.cols();
  const int iz = z.id();
  return z.graph()->Record(
      Tensor::Scalar(value), {z},
      [iz, labels, n, clip](Graph& g, const Tensor&, const Tensor& dy) {
        if (!g.needs_grad(iz)) return;
        const Tensor& zv = g.value(iz);
        Tensor& dz = g.GradBuffer(iz);
        const Real scale = dy.item() / static_cast<Real>(n);
        for (std::size_t k = 0; k < n; ++k) {
          const Real p = zv[k];
          if (p < clip || p > 1 - clip) continue;
          dz[k] += scale * (-labels[k] / p + (1 - labels[k]) / (1 - p));
        }
      });
}

Tensor PermuteColumns(const Tensor& labels, const std::vector<std::size_t>& perm) {
  RequireMatrix(labels, "permute_columns");
  if (perm.size() != labels.cols()) {
    throw DimensionError("permutation of size " + std::to_string(perm.size()) + " for " +
                         std::to_string(labels.cols()) + " columns");
  }
  Tensor out(labels.shape());
  for (std::size_t t = 0; t < labels.rows(); ++t)
    for (std::size_t c = 0; c < perm.size(); ++c) out(t, c) = labels(t, perm[c]);
  return out;
}

std::vector<std::vector<std::size_t>> Permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

PermutationResult PermutationFreeLoss(Var z, const Tensor& labels, std::size_t valid_rows,
                                      Real clip, int max_speakers) {
  RequireLabels(z.value(), labels, "permutation_free_loss");
  const std::size_t c = labels.cols();
  if (c > static_cast<std::size_t>(max_speakers)) {
    throw CapacityError("permutation search over " + std::to_string(c) +
                        " speakers exceeds the cap of " + std::to_string(max_speakers));
  }
  PermutationResult result;
  Real best = 0;
  for (const auto& perm : Permutations(c)) {
    const Real v = BceValue(z.value(), PermuteColumns(labels, perm), valid_rows, clip);
    if (result.best_perm.empty() || v < best) {
      best = v;
      result.best_perm = perm;
    }
  }
  result.loss = Bce(z, PermuteColumns(labels, result.best_perm), valid_rows, clip);
  return result;
}

Tensor PowersetOnehot(const Tensor& labels, int max_speakers) {
  RequireMatrix(labels, "powerset_onehot");
  const std::size_t c = labels.cols();
  if (c > static_cast<std::size_t>(max_speakers)) {
    throw CapacityError("power set of " + std::to_string(c) + " speakers exceeds the cap of " +
                        std::to_string(max_speakers));
  }
  Tensor out({labels.rows(), std::size_t{1} << c});
  for (std::size_t t = 0; t < labels.rows(); ++t) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < c; ++k)
      if (labels(t, k) > 0.5) idx |= std::size_t{1} << k;
    out(t, idx) = 1;
  }
  return out;
}

Var DcLoss(Var v, const Tensor& labels, std::size_t valid_rows, bool normalize) {
  RequireMatrix(v.value(), "dc_loss");
  if (v.value().rows() != labels.rows()) {
    throw DimensionError("dc_loss: embeddings " + ShapeString(v.shape()) + " vs labels " +
                         ShapeString(labels.shape()));
  }
  const std::size_t rows = ValidRows(valid_rows, labels.rows());
  Graph& g = *v.graph();
  Tensor onehot = PowersetOnehot(labels);
  for (std::size_t t = rows; t < onehot.rows(); ++t)
    for (Real& x : onehot.row(t)) x = 0;
  const Var vm = MaskRows(v, rows);
  const Var l = g.Constant(onehot);
  Tensor ltl({onehot.cols(), onehot.cols()});
  kernels::GemmTN(onehot, onehot, &ltl, false);
  Real const_term = 0;
  for (Real x : ltl.values()) const_term += x * x;
  Var loss = Sub(SumSquares(MatMulTN(vm, vm)), Scale(SumSquares(MatMulTN(vm, l)), 2));
  loss = AddConstant(loss, const_term);
  if (normalize) loss = Scale(loss, 1.0 / (static_cast<Real>(rows) * static_cast<Real>(rows)));
  return loss;
}

Real DcLossDirect(const Tensor& v, const Tensor& labels) {
  const Tensor l = PowersetOnehot(labels);
  const std::size_t n = v.rows();
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real a = 0, b = 0;
      for (std::size_t k = 0; k < v.cols(); ++k) a += v(i, k) * v(j, k);
      for (std::size_t k = 0; k < l.cols(); ++k) b += l(i, k) * l(j, k);
      s += (a - b) * (a - b);
    }
  }
  return s;
}

Var MultiObjective(Var pf, Var dc, Real alpha) {
  if (!(alpha >= 0 && alpha <= 1)) {
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (alpha == 0) return pf;
  if (alpha == 1) return dc;
  return Add(Scale(pf, 1 - alpha), Scale(dc, alpha));
}

}  // namespace eend
