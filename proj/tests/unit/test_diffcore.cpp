// Copyright 2026 The bfc Authors
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

#include "bfc/checkpoint.hpp"
#include "bfc/errors.hpp"
#include "bfc/grad_check.hpp"
#include "bfc/nn.hpp"
#include "bfc/ops.hpp"
#include "bfc/rng.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace
{

using bfc::Binding;
using bfc::ParamStore;
using bfc::Tape;
using bfc::Tensor;
using bfc::Var;
namespace ops = bfc::ops;

Tensor<double> t2(std::size_t r, std::size_t c, std::vector<double> v)
{
  return Tensor<double>({r, c}, std::move(v));
}

}  // namespace

TEST(Ops, IdentityMatmul)
{
  bfc::Rng rng(1);
  Tape<double> tape;
  Tensor<double> eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const Tensor<double> x = bfc_test::random_matrix(3, 4, rng);
  const auto y = ops::matmul(tape.constant(eye), tape.constant(x));
  EXPECT_EQ(y.value(), x);
}

TEST(Ops, Relu)
{
  Tape<double> tape;
  const auto y = ops::relu(tape.constant(Tensor<double>({3}, {-1.0, 0.0, 2.0})));
  EXPECT_EQ(y.value(), Tensor<double>({3}, {0.0, 0.0, 2.0}));
}

TEST(Ops, IdentityKernelConv)
{
  bfc::Rng rng(2);
  Tape<double> tape;
  const Tensor<double> x = bfc_test::random_matrix(7, 3, rng);
  Tensor<double> w({3, 3, 1});
  for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;
  const auto y = ops::conv1d(tape.constant(x), tape.constant(w), Var<double>{}, 1, 0);
  EXPECT_EQ(y.value(), x);
}

TEST(Ops, SoftmaxOfSymmetricInputIsUniform)
{
  Tape<double> tape;
  const auto y = ops::softmax(tape.constant(t2(1, 2, {0.7, 0.7})), -1);
  EXPECT_DOUBLE_EQ(y.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(y.value()[1], 0.5);
}

TEST(Ops, SoftmaxRowsSumToOneAndLogSoftmaxMatches)
{
  bfc::Rng rng(3);
  Tape<double> tape;
  const auto x = tape.constant(bfc_test::random_matrix(20, 6, rng, 5.0));
  const auto s = ops::softmax(x, 1);
  const auto l = ops::log_softmax(x, 1);
  for (std::size_t r = 0; r < 20; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 6; ++c) {
      sum += s.value()(r, c);
      EXPECT_NEAR(l.value()(r, c), std::log(s.value()(r, c)), 1e-6);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Ops, ShapeMismatchNamesBothShapes)
{
  Tape<double> tape;
  try {
    ops::matmul(tape.constant(Tensor<double>({2, 3})), tape.constant(Tensor<double>({4, 5})));
    FAIL() << "expected a shape error";
  } catch (const bfc::ShapeError & e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("[2, 3]"), std::string::npos) << what;
    EXPECT_NE(what.find("[4, 5]"), std::string::npos) << what;
  }
}

TEST(Ops, AxisOutOfRange)
{
  Tape<double> tape;
  EXPECT_THROW(ops::sum(tape.constant(Tensor<double>({2, 3})), 2), bfc::AxisError);
  EXPECT_THROW(ops::softmax(tape.constant(Tensor<double>({2, 3})), -3), bfc::AxisError);
}

TEST(Ops, MaxpoolRoutesGradientToLowestArgmax)
{
  Tape<double> tape;
  ParamStore<double> ps;
  ps.add("x", t2(4, 1, {3.0, 3.0, 1.0, 2.0}));
  Binding<double> p(tape, ps);
  const auto y = ops::maxpool1d(p("x"), 2, 2);
  EXPECT_EQ(y.value(), t2(2, 1, {3.0, 2.0}));
  const auto g = bfc::backward(ops::sum_all(y), p);
  EXPECT_EQ(g.get("x"), t2(4, 1, {1.0, 0.0, 0.0, 1.0}));
}

TEST(Ops, GatherScatterAreAdjoint)
{
  bfc::Rng rng(4);
  Tape<double> tape;
  const auto x = tape.constant(bfc_test::random_matrix(5, 3, rng));
  const std::vector<std::size_t> idx{4, 0, 0, 2};
  const auto g = ops::gather(x, idx);
  const auto s = ops::scatter_add(g, idx, 5);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_DOUBLE_EQ(s.value()(0, c), 2.0 * x.value()(0, c));
    EXPECT_DOUBLE_EQ(s.value()(1, c), 0.0);
    EXPECT_DOUBLE_EQ(s.value()(4, c), x.value()(4, c));
  }
}

TEST(Ops, SmoothL1BothBranches)
{
  Tape<double> tape;
  const auto y = ops::smooth_l1(tape.constant(Tensor<double>({3}, {0.5, 2.0, -3.0})),
                                tape.constant(Tensor<double>({3}, {0.0, 0.0, 0.0})));
  EXPECT_DOUBLE_EQ(y.value()[0], 0.125);
  EXPECT_DOUBLE_EQ(y.value()[1], 1.5);
  EXPECT_DOUBLE_EQ(y.value()[2], 2.5);
}

TEST(Ops, LayerNormMatchesOracle)
{
  bfc::Rng rng(5);
  Tape<double> tape;
  const Tensor<double> x = bfc_test::random_matrix(4, 6, rng);
  Tensor<double> gamma({6});
  Tensor<double> beta({6});
  for (std::size_t i = 0; i < 6; ++i) {
    gamma[i] = rng.normal();
    beta[i] = rng.normal();
  }
  const auto y = ops::layer_norm(tape.constant(x), tape.constant(gamma), tape.constant(beta));
  const auto xm = bfc_test::from_tensor(x);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto ref = bfc_test::layer_norm(xm[r], gamma, beta);
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(y.value()(r, c), ref[c], 1e-12);
  }
}

TEST(Ops, L2NormRows)
{
  Tape<double> tape;
  const auto y = ops::l2_norm_rows(tape.constant(t2(2, 2, {3.0, 4.0, 0.0, -2.0})));
  EXPECT_DOUBLE_EQ(y.value()[0], 5.0);
  EXPECT_DOUBLE_EQ(y.value()[1], 2.0);
}

TEST(Autodiff, SquareHasDerivativeSix)
{
  Tape<double> tape;
  ParamStore<double> ps;
  ps.add("x", Tensor<double>::scalar(3.0));
  Binding<double> p(tape, ps);
  const auto g = bfc::backward(ops::mul(p("x"), p("x")), p);
  EXPECT_DOUBLE_EQ(g.get("x").item(), 6.0);
}

TEST(Autodiff, UnusedParamHasZeroGradient)
{
  Tape<double> tape;
  ParamStore<double> ps;
  ps.add("x", Tensor<double>({2}, {1.0, 2.0}));
  ps.add("unused", Tensor<double>({3}, 1.0));
  Binding<double> p(tape, ps);
  const auto g = bfc::backward(ops::sum_all(p("x")), p);
  EXPECT_EQ(g.get("unused"), Tensor<double>({3}, 0.0));
}

TEST(Autodiff, NonScalarLossIsRejected)
{
  Tape<double> tape;
  ParamStore<double> ps;
  ps.add("x", Tensor<double>({2}, {1.0, 2.0}));
  Binding<double> p(tape, ps);
  EXPECT_THROW(bfc::backward(p("x"), p), bfc::ContractError);
}

TEST(Autodiff, BackwardIsLinear)
{
  bfc::Rng rng(6);
  ParamStore<double> ps;
  ps.add("x", bfc_test::random_matrix(3, 4, rng));
  ps.add("w", bfc_test::random_matrix(4, 2, rng));
  const auto f = [](Binding<double> & p) { return ops::sum_all(ops::tanh(ops::matmul(p("x"), p("w")))); };
  const auto g = [](Binding<double> & p) { return ops::sum_all(ops::mul(p("x"), p("x"))); };
  const double a = 0.7;
  const double b = -1.3;
  const auto grad = [&](auto && fn) {
    Tape<double> tape;
    Binding<double> p(tape, ps);
    return bfc::backward(fn(p), p);
  };
  const auto gf = grad(f);
  const auto gg = grad(g);
  const auto gc = grad([&](Binding<double> & p) { return ops::add(ops::scale(f(p), a), ops::scale(g(p), b)); });
  for (const auto & name : ps.names()) {
    for (std::size_t i = 0; i < ps.get(name).size(); ++i) {
      EXPECT_NEAR(gc.get(name)[i], a * gf.get(name)[i] + b * gg.get(name)[i], 1e-12);
    }
  }
}

TEST(Autodiff, NoBackwardClosuresWithoutGradients)
{
  Tape<double> tape;
  ParamStore<double> ps;
  ps.add("x", Tensor<double>({2}, {1.0, 2.0}));
  Binding<double> p(tape, ps, false);
  const auto y = ops::sum_all(ops::mul(p("x"), p("x")));
  EXPECT_FALSE(y.requires_grad());
}

TEST(GradCheck, RandomThreeLayerMlp)
{
  bfc::Rng rng(7);
  ParamStore<double> ps;
  const bfc::nn::Mlp first("l1", 5, 8, 8);
  const bfc::nn::Linear last{"l3", 8, 1, true};
  first.init(ps, rng);
  last.init(ps, rng);
  ps.add("x", bfc_test::random_matrix(4, 5, rng));
  const auto f = [&](Binding<double> & p) { return ops::sum_all(last(p, ops::tanh(first(p, p("x"))))); };
  EXPECT_LT(bfc::grad_check(f, ps).max_rel_error, 1e-4);
}

TEST(GradCheck, QuadraticFormIsExact)
{
  bfc::Rng rng(8);
  ParamStore<double> ps;
  ps.add("x", bfc_test::random_matrix(1, 6, rng));
  const Tensor<double> a = bfc_test::random_matrix(6, 6, rng);
  const auto f = [&](Binding<double> & p) {
    const auto x = p("x");
    return ops::sum_all(ops::mul(ops::matmul(x, bfc::nn::constant(p, a)), x));
  };
  EXPECT_LT(bfc::grad_check(f, ps).max_rel_error, 1e-9);
}

TEST(GradCheck, ConstantFunctionHasBothGradientsZero)
{
  ParamStore<double> ps;
  ps.add("x", Tensor<double>({3}, 1.0));
  const auto f = [](Binding<double> & p) { return bfc::nn::constant(p, Tensor<double>::scalar(2.5)); };
  const auto r = bfc::grad_check(f, ps);
  EXPECT_EQ(r.worst_analytic, 0.0);
  EXPECT_EQ(r.worst_numeric, 0.0);
  EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(GradCheck, NonFiniteFunctionIsACheckError)
{
  ParamStore<double> ps;
  ps.add("x", Tensor<double>({1}, 1.0));
  const auto f = [](Binding<double> & p) {
    return bfc::nn::constant(p, Tensor<double>::scalar(std::numeric_limits<double>::quiet_NaN()));
  };
  EXPECT_THROW(bfc::grad_check(f, ps), bfc::CheckError);
}

TEST(ParamStoreTest, FlatViewCoversEveryParameter)
{
  ParamStore<double> ps;
  ps.add("a", Tensor<double>({2, 3}, 1.0));
  ps.add("b", Tensor<double>({4}, 2.0));
  EXPECT_EQ(ps.flat_size(), 10u);
  EXPECT_EQ(ps.offset("b"), 6u);
  auto flat = ps.flatten();
  flat[7] = 9.0;
  ps.unflatten(flat);
  EXPECT_EQ(ps.get("b")[1], 9.0);
  EXPECT_THROW(ps.add("a", Tensor<double>({1})), bfc::ContractError);
}

TEST(CheckpointTest, RoundTripIsBitExact)
{
  bfc::Rng rng(9);
  ParamStore<float> ps;
  ps.add("w", bfc_test::random_matrix(3, 5, rng).cast<float>());
  ps.add("b", Tensor<float>({5}, 0.1f));
  bfc::Checkpoint ck;
  ck.meta["k"] = "v";
  bfc::append_params(ck, ps);
  const bfc::Checkpoint back = bfc::decode_checkpoint(bfc::encode_checkpoint(ck));
  ParamStore<float> restored = ps.zeros_like();
  bfc::restore_params(back, restored);
  EXPECT_EQ(restored, ps);
  EXPECT_EQ(back.meta.at("k"), "v");
  EXPECT_EQ(back.entry("w").dtype(), "f32");
}

TEST(CheckpointTest, ShapeMismatchIsReported)
{
  ParamStore<float> ps;
  ps.add("w", Tensor<float>({2, 2}));
  bfc::Checkpoint ck;
  bfc::append_params(ck, ps);
  ParamStore<float> other;
  other.add("w", Tensor<float>({3, 2}));
  EXPECT_THROW(bfc::restore_params(ck, other), bfc::ShapeError);
}
