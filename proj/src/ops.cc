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

#include "eend/ops.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eend/errors.h"

namespace eend {

namespace {

constexpr Real kSigmoidLow = std::numeric_limits<Real>::min();
const Real kSigmoidHigh = std::nextafter(Real{1}, Real{0});

Graph& GraphOf(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.graph();
}

void RequireSameShape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes differ, " +
                         ShapeString(a.shape()) + " vs " +
                         ShapeString(b.shape()));
  }
}

std::size_t ClampCount(std::size_t requested, std::size_t available) {
  return requested == kAllRows ? available : std::min(requested, available);
}

}  // namespace

Real SigmoidValue(Real x) {
  Real y;
  if (x >= 0) {
    y = 1 / (1 + std::exp(-x));
  } else {
    const Real e = std::exp(x);
    y = e / (1 + e);
  }
  return std::clamp(y, kSigmoidLow, kSigmoidHigh);
}

Tensor SoftmaxRowsValue(const Tensor& a, Real scale, std::size_t valid_cols) {
  RequireMatrix(a, "softmax");
  if (!(scale > 0)) {
    throw ParameterError("softmax: scale must be positive, got " +
                         std::to_string(scale));
  }
  a.CheckFinite("softmax input");
  const std::size_t n = a.cols();
  const std::size_t valid = ClampCount(valid_cols, n);
  if (valid == 0) throw ParameterError("softmax: no valid columns");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto in = a.row(i);
    auto out = y.row(i);
    Real mx = in[0];
    for (std::size_t j = 1; j < valid; ++j) mx = std::max(mx, in[j]);
    Real total = 0;
    for (std::size_t j = 0; j < valid; ++j) {
      out[j] = std::exp(scale * (in[j] - mx));
      total += out[j];
    }
    for (std::size_t j = 0; j < valid; ++j) out[j] /= total;
  }
  return y;
}

Var MatMul(Var a, Var b) {
  Graph& g = GraphOf(a);
  Tensor out;
  kernels::Gemm(a.value(), b.value(), &out, false);
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    if (g.needs_grad(ia))
                      kernels::GemmNT(dy, g.value(ib), &g.GradBuffer(ia), true);
                    if (g.needs_grad(ib))
                      kernels::GemmTN(g.value(ia), dy, &g.GradBuffer(ib), true);
                  });
}

Var MatMulNT(Var a, Var b) {
  Graph& g = GraphOf(a);
  Tensor out;
  kernels::GemmNT(a.value(), b.value(), &out, false);
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    // y = a b^T: da = dy b, db = dy^T a
                    if (g.needs_grad(ia))
                      kernels::Gemm(dy, g.value(ib), &g.GradBuffer(ia), true);
                    if (g.needs_grad(ib))
                      kernels::GemmTN(dy, g.value(ia), &g.GradBuffer(ib), true);
                  });
}

Var MatMulTN(Var a, Var b) {
  Graph& g = GraphOf(a);
  Tensor out;
  kernels::GemmTN(a.value(), b.value(), &out, false);
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    // y = a^T b: da = b dy^T, db = a dy
                    if (g.needs_grad(ia))
                      kernels::GemmNT(g.value(ib), dy, &g.GradBuffer(ia), true);
                    if (g.needs_grad(ib))
                      kernels::Gemm(g.value(ia), dy, &g.GradBuffer(ib), true);
                  });
}

Var AddRowVector(Var a, Var bias) {
  Graph& g = GraphOf(a);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  RequireMatrix(av, "add_row_vector");
  if (bv.rank() != 1 || bv.size() != av.cols()) {
    throw DimensionError("add_row_vector: bias " + ShapeString(bv.shape()) +
                         " does not match " + ShapeString(av.shape()));
  }
  Tensor out = av;
  const std::size_t n = av.cols();
  for (std::size_t i = 0; i < av.rows(); ++i) {
    Real* r = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) r[j] += bv[j];
  }
  const int ia = a.id(), ib = bias.id();
  return g.Record(std::move(out), {a, bias},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    g.AccumulateGrad(ia, dy);
                    if (g.needs_grad(ib)) {
                      Tensor& db = g.GradBuffer(ib);
                      const std::size_t n = dy.cols();
                      for (std::size_t i = 0; i < dy.rows(); ++i)
                        for (std::size_t j = 0; j < n; ++j) db[j] += dy(i, j);
                    }
                  });
}

Var Add(Var a, Var b) {
  RequireSameShape(a, b, "add");
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    g.AccumulateGrad(ia, dy);
                    g.AccumulateGrad(ib, dy);
                  });
}

Var Sub(Var a, Var b) {
  RequireSameShape(a, b, "sub");
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    g.AccumulateGrad(ia, dy);
                    if (g.needs_grad(ib)) {
                      Tensor& db = g.GradBuffer(ib);
                      for (std::size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
                    }
                  });
}

Var Mul(Var a, Var b) {
  RequireSameShape(a, b, "mul");
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Record(std::move(out), {a, b},
                  [ia, ib](Graph& g, const Tensor&, const Tensor& dy) {
                    if (g.needs_grad(ia)) {
                      Tensor& da = g.GradBuffer(ia);
                      const Tensor& bv = g.value(ib);
                      for (std::size_t i = 0; i < dy.size(); ++i)
                        da[i] += dy[i] * bv[i];
                    }
                    if (g.needs_grad(ib)) {
                      Tensor& db = g.GradBuffer(ib);
                      const Tensor& av = g.value(ia);
                      for (std::size_t i = 0; i < dy.size(); ++i)
                        db[i] += dy[i] * av[i];
                    }
                  });
}

Var Scale(Var a, Real factor) {
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  for (Real& v : out.values()) v *= factor;
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, factor](Graph& g, const Tensor&, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    for (std::size_t i = 0; i < dy.size(); ++i)
                      da[i] += factor * dy[i];
                  });
}

Var AddConstant(Var a, Real constant) {
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  for (Real& v : out.values()) v += constant;
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia](Graph& g, const Tensor&, const Tensor& dy) {
                    g.AccumulateGrad(ia, dy);
                  });
}

Var Elementwise(Activation op, Var a) {
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  switch (op) {
    case Activation::kSigmoid:
      for (Real& v : out.values()) v = SigmoidValue(v);
      break;
    case Activation::kTanh:
      for (Real& v : out.values()) v = std::tanh(v);
      break;
    case Activation::kRelu:
      for (Real& v : out.values()) v = v > 0 ? v : Real{0};
      break;
  }
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, op](Graph& g, const Tensor& y, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    for (std::size_t i = 0; i < dy.size(); ++i) {
                      Real d = 0;
                      switch (op) {
                        case Activation::kSigmoid:
                          d = y[i] * (1 - y[i]);
                          break;
                        case Activation::kTanh:
                          d = 1 - y[i] * y[i];
                          break;
                        case Activation::kRelu:
                          d = y[i] > 0 ? 1 : 0;
                          break;
                      }
                      da[i] += dy[i] * d;
                    }
                  });
}

Var ScaledSoftmaxRows(Var a, Real scale, std::size_t valid_cols) {
  Graph& g = GraphOf(a);
  Tensor out = SoftmaxRowsValue(a.value(), scale, valid_cols);
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, scale](Graph& g, const Tensor& y, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    const std::size_t n = y.cols();
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      const Real* yr = y.data() + i * n;
                      const Real* gr = dy.data() + i * n;
                      Real dot = 0;
                      for (std::size_t j = 0; j < n; ++j) dot += yr[j] * gr[j];
                      Real* dr = da.data() + i * n;
                      for (std::size_t j = 0; j < n; ++j)
                        dr[j] += scale * yr[j] * (gr[j] - dot);
                    }
                  });
}

Var LayerNorm(Var e, Var gain, Var bias, Real epsilon) {
  Graph& g = GraphOf(e);
  const Tensor& x = e.value();
  RequireMatrix(x, "layer_norm");
  const std::size_t rows = x.rows(), d = x.cols();
  if (gain.value().rank() != 1 || gain.value().size() != d ||
      bias.value().rank() != 1 || bias.value().size() != d) {
    throw DimensionError("layer_norm: gain/bias " +
                         ShapeString(gain.value().shape()) + "/" +
                         ShapeString(bias.value().shape()) +
                         " do not match input " + ShapeString(x.shape()));
  }
  Tensor xhat(x.shape());
  std::vector<Real> inv_std(rows);
  Tensor out(x.shape());
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < rows; ++i) {
    auto xr = x.row(i);
    Real mean = 0;
    for (Real v : xr) mean += v;
    mean /= static_cast<Real>(d);
    Real var = 0;
    for (Real v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<Real>(d);
    inv_std[i] = 1 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < d; ++j) {
      xhat(i, j) = (xr[j] - mean) * inv_std[i];
      out(i, j) = gv[j] * xhat(i, j) + bv[j];
    }
  }
  const int ie = e.id(), ig = gain.id(), ib = bias.id();
  return g.Record(
      std::move(out), {e, gain, bias},
      [ie, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Graph& g, const Tensor&, const Tensor& dy) {
        const std::size_t rows = dy.rows(), d = dy.cols();
        if (g.needs_grad(ig) || g.needs_grad(ib)) {
          Tensor* dg = g.needs_grad(ig) ? &g.GradBuffer(ig) : nullptr;
          Tensor* db = g.needs_grad(ib) ? &g.GradBuffer(ib) : nullptr;
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
              if (dg) (*dg)[j] += dy(i, j) * xhat(i, j);
              if (db) (*db)[j] += dy(i, j);
            }
          }
        }
        if (!g.needs_grad(ie)) return;
        const Tensor& gv = g.value(ig);
        Tensor& dx = g.GradBuffer(ie);
        std::vector<Real> dxhat(d);
        for (std::size_t i = 0; i < rows; ++i) {
          Real mean_d = 0, mean_dx = 0;
          for (std::size_t j = 0; j < d; ++j) {
            dxhat[j] = dy(i, j) * gv[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xhat(i, j);
          }
          mean_d /= static_cast<Real>(d);
          mean_dx /= static_cast<Real>(d);
          for (std::size_t j = 0; j < d; ++j) {
            dx(i, j) +=
                inv_std[i] * (dxhat[j] - mean_d - xhat(i, j) * mean_dx);
          }
        }
      });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  Graph& g = GraphOf(parts[0]);
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Var& p : parts) {
    RequireMatrix(p.value(), "concat_cols");
    if (p.value().rows() != rows) {
      throw DimensionError("concat_cols: row counts differ, " +
                           ShapeString(parts[0].shape()) + " vs " +
                           ShapeString(p.shape()));
    }
    offsets.push_back(total);
    total += p.value().cols();
  }
  Tensor out({rows, total});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(pv.row(i).begin(), pv.row(i).end(),
                out.data() + i * total + offsets[k]);
  }
  std::vector<int> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  return g.Record(std::move(out), parts,
                  [ids, offsets](Graph& g, const Tensor&, const Tensor& dy) {
                    const std::size_t total = dy.cols();
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (!g.needs_grad(ids[k])) continue;
                      Tensor& dp = g.GradBuffer(ids[k]);
                      const std::size_t w = dp.cols();
                      for (std::size_t i = 0; i < dy.rows(); ++i) {
                        const Real* src = dy.data() + i * total + offsets[k];
                        Real* dst = dp.data() + i * w;
                        for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
                      }
                    }
                  });
}

Var SliceCols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = GraphOf(a);
  const Tensor& av = a.value();
  RequireMatrix(av, "slice_cols");
  if (begin >= end || end > av.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " +
                         ShapeString(av.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out({av.rows(), w});
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = av(i, begin + j);
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, begin](Graph& g, const Tensor&, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    for (std::size_t i = 0; i < dy.rows(); ++i)
                      for (std::size_t j = 0; j < dy.cols(); ++j)
                        da(i, begin + j) += dy(i, j);
                  });
}

Var MaskRows(Var a, std::size_t valid_rows) {
  Graph& g = GraphOf(a);
  Tensor out = a.value();
  RequireMatrix(out, "mask_rows");
  const std::size_t valid = ClampCount(valid_rows, out.rows());
  for (std::size_t i = valid; i < out.rows(); ++i)
    for (Real& v : out.row(i)) v = 0;
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, valid](Graph& g, const Tensor&, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    const std::size_t n = dy.cols();
                    for (std::size_t k = 0; k < valid * n; ++k) da[k] += dy[k];
                  });
}

Var L2NormalizeRows(Var a) {
  Graph& g = GraphOf(a);
  const Tensor& av = a.value();
  RequireMatrix(av, "l2_normalize_rows");
  Tensor out(av.shape());
  std::vector<Real> norms(av.rows());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    Real ss = 0;
    for (Real v : av.row(i)) ss += v * v;
    norms[i] = std::max(std::sqrt(ss), Real{1e-12});
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) / norms[i];
  }
  const int ia = a.id();
  return g.Record(std::move(out), {a},
                  [ia, norms = std::move(norms)](Graph& g, const Tensor& y,
                                                 const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      Real dot = 0;
                      for (std::size_t j = 0; j < y.cols(); ++j)
                        dot += y(i, j) * dy(i, j);
                      for (std::size_t j = 0; j < y.cols(); ++j)
                        da(i, j) += (dy(i, j) - y(i, j) * dot) / norms[i];
                    }
                  });
}

Var Sum(Var a) {
  Graph& g = GraphOf(a);
  Real s = 0;
  for (Real v : a.value().values()) s += v;
  const int ia = a.id();
  return g.Record(Tensor::Scalar(s), {a},
                  [ia](Graph& g, const Tensor&, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    const Real d = dy.item();
                    for (Real& v : da.values()) v += d;
                  });
}

Var SumSquares(Var a) {
  Graph& g = GraphOf(a);
  Real s = 0;
  for (Real v : a.value().values()) s += v * v;
  const int ia = a.id();
  return g.Record(Tensor::Scalar(s), {a},
                  [ia](Graph& g, const Tensor&, const Tensor& dy) {
                    if (!g.needs_grad(ia)) return;
                    Tensor& da = g.GradBuffer(ia);
                    const Tensor& av = g.value(ia);
                    const Real d = 2 * dy.item();
                    for (std::size_t i = 0; i < av.size(); ++i)
                      da[i] += d * av[i];
                  });
}

Var Lstm(Var x, Var w_input, Var w_hidden, Var bias, bool reverse,
         std::size_t valid_len) {
  Graph& g = GraphOf(x);
  const Tensor& xv = x.value();
  const Tensor& wx = w_input.value();
  const Tensor& wh = w_hidden.value();
  const Tensor& bv = bias.value();
  RequireMatrix(xv, "lstm");
  RequireMatrix(wx, "lstm");
  RequireMatrix(wh, "lstm");
  const std::size_t steps = xv.rows();
  const std::size_t hidden = wh.rows();
  const std::size_t g4 = 4 * hidden;
  if (wx.rows() != xv.cols() || wx.cols() != g4 || wh.cols() != g4 ||
      bv.rank() != 1 || bv.size() != g4) {
    throw DimensionError("lstm: weights " + ShapeString(wx.shape()) + ", " +
                         ShapeString(wh.shape()) + ", " +
                         ShapeString(bv.shape()) + " do not fit input " +
                         ShapeString(xv.shape()));
  }
  const std::size_t valid = ClampCount(valid_len, steps);

  // Pre-activations from the input path for every frame at once.
  Tensor gates;
  kernels::Gemm(xv, wx, &gates, false);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < g4; ++k) gates(t, k) += bv[k];

  // acts holds the post-nonlinearity gates (i, f, g, o) per frame.
  Tensor acts({steps, g4});
  Tensor cell({steps, hidden});
  Tensor cell_tanh({steps, hidden});
  Tensor out({steps, hidden});
  std::vector<Real> h_prev(hidden, 0), c_prev(hidden, 0), a(g4);
  for (std::size_t n = 0; n < valid; ++n) {
    const std::size_t t = reverse ? valid - 1 - n : n;
    for (std::size_t k = 0; k < g4; ++k) a[k] = gates(t, k);
    for (std::size_t p = 0; p < hidden; ++p) {
      const Real hp = h_prev[p];
      const Real* wr = wh.data() + p * g4;
      for (std::size_t k = 0; k < g4; ++k) a[k] += hp * wr[k];
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      const Real ig = SigmoidValue(a[j]);
      const Real fg = SigmoidValue(a[hidden + j]);
      const Real cg = std::tanh(a[2 * hidden + j]);
      const Real og = SigmoidValue(a[3 * hidden + j]);
      acts(t, j) = ig;
      acts(t, hidden + j) = fg;
      acts(t, 2 * hidden + j) = cg;
      acts(t, 3 * hidden + j) = og;
      const Real c = fg * c_prev[j] + ig * cg;
      cell(t, j) = c;
      cell_tanh(t, j) = std::tanh(c);
      out(t, j) = og * cell_tanh(t, j);
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      h_prev[j] = out(t, j);
      c_prev[j] = cell(t, j);
    }
  }

  const int ix = x.id(), iwx = w_input.id(), iwh = w_hidden.id(),
            ib = bias.id();
  return g.Record(
      std::move(out), {x, w_input, w_hidden, bias},
      [ix, iwx, iwh, ib, reverse, valid, hidden, acts = std::move(acts),
       cell = std::move(cell), cell_tanh = std::move(cell_tanh)](
          Graph& g, const Tensor& h, const Tensor& dy) {
        const std::size_t steps = dy.rows();
        const std::size_t g4 = 4 * hidden;
        const Tensor& wh = g.value(iwh);
        Tensor dgates({steps, g4});
        std::vector<Real> dh_next(hidden, 0), dc_next(hidden, 0), dh(hidden);
        const bool want_wh = g.needs_grad(iwh);
        Tensor* dwh = want_wh ? &g.GradBuffer(iwh) : nullptr;
        for (std::size_t n = valid; n-- > 0;) {
          const std::size_t t = reverse ? valid - 1 - n : n;
          const bool has_prev = n > 0;
          const std::size_t tp = reverse ? t + 1 : t - 1;
          Real* da = dgates.data() + t * g4;
          for (std::size_t j = 0; j < hidden; ++j) {
            dh[j] = dy(t, j) + dh_next[j];
            const Real ig = acts(t, j), fg = acts(t, hidden + j),
                       cg = acts(t, 2 * hidden + j),
                       og = acts(t, 3 * hidden + j);
            const Real ct = cell_tanh(t, j);
            const Real dc = dh[j] * og * (1 - ct * ct) + dc_next[j];
            const Real cp = has_prev ? cell(tp, j) : Real{0};
            da[j] = dc * cg * ig * (1 - ig);
            da[hidden + j] = dc * cp * fg * (1 - fg);
            da[2 * hidden + j] = dc * ig * (1 - cg * cg);
            da[3 * hidden + j] = dh[j] * ct * og * (1 - og);
            dc_next[j] = dc * fg;
          }
          // Recurrent path: a_t += h_{t-1} W_h.
          for (std::size_t p = 0; p < hidden; ++p) {
            const Real* wr = wh.data() + p * g4;
            Real s = 0;
            for (std::size_t k = 0; k < g4; ++k) s += wr[k] * da[k];
            dh_next[p] = s;
          }
          if (dwh && has_prev) {
            for (std::size_t p = 0; p < hidden; ++p) {
              const Real hp = h(tp, p);
              Real* wr = dwh->data() + p * g4;
              for (std::size_t k = 0; k < g4; ++k) wr[k] += hp * da[k];
            }
          }
        }
        if (g.needs_grad(iwx))
          kernels::GemmTN(g.value(ix), dgates, &g.GradBuffer(iwx), true);
        if (g.needs_grad(ib)) {
          Tensor& db = g.GradBuffer(ib);
          for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t k = 0; k < g4; ++k) db[k] += dgates(t, k);
        }
        if (g.needs_grad(ix))
          kernels::GemmNT(dgates, g.value(iwx), &g.GradBuffer(ix), true);
      });
}

}  // namespace eend
