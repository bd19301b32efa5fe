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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "eend/errors.h"
#include "eend/graph.h"
#include "eend/ops.h"
#include "test_util.h"

namespace eend {
namespace {

using testing::NaiveMatMul;
using testing::RandomTensor;

TEST(TensorTest, ShapeAndValueCountAgree) {
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_THROW(Tensor({2, 3}, std::vector<Real>(5)), DimensionError);
  EXPECT_THROW(Tensor({0, 3}), DimensionError);
  EXPECT_EQ(Tensor::Scalar(2.5).item(), 2.5);
  EXPECT_TRUE(Tensor::Scalar(2.5).is_scalar());
}

TEST(TensorTest, CheckFiniteNamesTheProblem) {
  Tensor t({2, 2});
  t(1, 0) = std::numeric_limits<Real>::quiet_NaN();
  EXPECT_FALSE(t.AllFinite());
  try {
    t.CheckFinite("weights");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("weights"), std::string::npos);
  }
}

TEST(MatMulTest, IdentityLeavesOperandUnchanged) {
  SplitMix64 rng(1);
  Tensor b = RandomTensor({3, 5}, rng);
  Graph g;
  Var out = MatMul(g.Constant(Tensor::Identity(3)), g.Constant(b));
  EXPECT_EQ(out.value(), b);
}

TEST(MatMulTest, ZerosGiveZeros) {
  SplitMix64 rng(2);
  Graph g;
  Var out = MatMul(g.Constant(Tensor({2, 3})), g.Constant(RandomTensor({3, 4}, rng)));
  EXPECT_EQ(out.value(), Tensor({2, 4}));
}

TEST(MatMulTest, HandComputedProduct) {
  Graph g;
  Var out = MatMul(g.Constant(Tensor::Matrix({{1, 2}, {3, 4}})),
                   g.Constant(Tensor::Matrix({{5}, {6}})));
  EXPECT_EQ(out.value(), Tensor::Matrix({{17}, {39}}));
}

TEST(MatMulTest, ShapeMismatchNamesBothShapes) {
  Graph g;
  try {
    MatMul(g.Constant(Tensor({2, 3})), g.Constant(Tensor({4, 2})));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

// Exact agreement with the triple loop on every size up to 8x8x8.
TEST(MatMulTest, MatchesNaiveLoopExactly) {
  SplitMix64 rng(3);
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t k = 1; k <= 8; ++k) {
      for (std::size_t n = 1; n <= 8; ++n) {
        Tensor a = RandomTensor({m, k}, rng);
        Tensor b = RandomTensor({k, n}, rng);
        Tensor c;
        kernels::Gemm(a, b, &c, false);
        ASSERT_EQ(c, NaiveMatMul(a, b)) << m << "x" << k << "x" << n;
        Tensor ct;
        kernels::GemmTN(kernels::Transpose(a), b, &ct, false);
        ASSERT_EQ(ct, c);
        Tensor cn;
        kernels::GemmNT(a, kernels::Transpose(b), &cn, false);
        ASSERT_EQ(cn, c);
      }
    }
  }
}

}  // namespace
}  // namespace eend
