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

#include "bfc/errors.hpp"
#include "bfc/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace
{

using bfc::Binding;
using bfc::ParamStore;
using bfc::Positions;
using bfc::Tape;
using bfc::Tensor;
using bfc::Vec2;

std::vector<Vec2> random_points(std::size_t n, double extent, bfc::Rng & rng)
{
  std::vector<Vec2> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent)});
  return p;
}

Tensor<double> attend(
  const bfc::DistanceAttention & att, const ParamStore<double> & ps, const Tensor<double> & q,
  const std::vector<Vec2> & qp, const Tensor<double> & c, const std::vector<Vec2> & cp, bool exclude_self = false)
{
  Tape<double> tape;
  Binding<double> p(tape, ps, false);
  return att(p, tape.constant(q), Positions{qp, "f"}, tape.constant(c), Positions{cp, "f"}, exclude_self).value();
}

std::vector<double> layer_norm_row(const Tensor<double> & x, std::size_t r, const ParamStore<double> & ps, const std::string & name)
{
  std::vector<double> row(x.dim(1));
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = x(r, j);
  return bfc_test::layer_norm(row, ps.get(name + ".gamma"), ps.get(name + ".beta"));
}

struct FusionFixture
{
  bfc::ModelConfig cfg = bfc_test::small_config(8);
  bfc::FusionNet net{cfg};
  ParamStore<double> ps;
  Tensor<double> actors, lanes, bounds;
  std::vector<Vec2> actor_xy, lane_xy, bound_xy;
  std::vector<std::vector<std::size_t>> matches;

  explicit FusionFixture(std::uint64_t seed)
  {
    bfc::Rng rng(seed);
    net.init(ps, rng);
    actors = bfc_test::random_matrix(3, 8, rng);
    lanes = bfc_test::random_matrix(10, 8, rng);
    bounds = bfc_test::random_matrix(6, 8, rng);
    actor_xy = random_points(3, 8.0, rng);
    lane_xy = random_points(10, 12.0, rng);
    bound_xy = random_points(6, 12.0, rng);
    for (std::size_t i = 0; i < 10; ++i) matches.push_back({rng.index(6)});
  }

  Tensor<double> run(Vec2 shift = {}) const
  {
    auto moved = [&](std::vector<Vec2> v) {
      for (auto & p : v) p = p + shift;
      return v;
    };
    const auto a = moved(actor_xy);
    const auto l = moved(lane_xy);
    const auto b = moved(bound_xy);
    Tape<double> tape;
    Binding<double> p(tape, ps, false);
    const bfc::FusionInputs in{{a, "f"}, {l, "f"}, {b, "f"}, &matches};
    return net(p, tape.constant(actors), tape.constant(lanes), tape.constant(bounds), in).value();
  }
};

}  // namespace

TEST(BoundaryToLane, NoBoundariesUsesAZeroContext)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  const bfc::BoundaryToLane b2l(cfg, "b2l");
  ParamStore<double> ps;
  bfc::Rng rng(1);
  b2l.init(ps, rng);
  const Tensor<double> lanes = bfc_test::random_matrix(5, 8, rng);
  Tape<double> tape;
  Binding<double> p(tape, ps, false);
  const auto y = b2l(p, tape.constant(lanes), tape.constant(Tensor<double>({0, 8})),
                     std::vector<std::vector<std::size_t>>(5)).value();
  ASSERT_TRUE(y.all_finite());
  const auto rows = bfc_test::from_tensor(lanes);
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<double> cat = rows[i];
    cat.resize(16, 0.0);
    auto h = bfc_test::affine(cat, ps.get("b2l.mlp.fc1.w"), &ps.get("b2l.mlp.fc1.b"));
    for (double & v : h) v = std::max(0.0, v);
    const auto m = bfc_test::affine(h, ps.get("b2l.mlp.fc2.w"), &ps.get("b2l.mlp.fc2.b"));
    std::vector<double> r(8);
    for (std::size_t j = 0; j < 8; ++j) r[j] = rows[i][j] + m[j];
    const auto ref = bfc_test::layer_norm(r, ps.get("b2l.norm.gamma"), ps.get("b2l.norm.beta"));
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(y(i, j), ref[j], 1e-12);
  }
}

TEST(BoundaryToLane, DuplicateMatchesLeaveTheMeanUnchanged)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  const bfc::BoundaryToLane b2l(cfg, "b2l");
  ParamStore<double> ps;
  bfc::Rng rng(2);
  b2l.init(ps, rng);
  const Tensor<double> lanes = bfc_test::random_matrix(3, 8, rng);
  const Tensor<double> bounds = bfc_test::random_matrix(4, 8, rng);
  const auto run = [&](const std::vector<std::vector<std::size_t>> & m) {
    Tape<double> tape;
    Binding<double> p(tape, ps, false);
    return b2l(p, tape.constant(lanes), tape.constant(bounds), m).value();
  };
  EXPECT_EQ(run({{0, 2}, {}, {3}}), run({{0, 2, 2}, {}, {3, 3}}));
}

TEST(DistanceAttention, FarContextsPassTheQueryThrough)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  const bfc::DistanceAttention att(cfg, "att", 5.0);
  ParamStore<double> ps;
  bfc::Rng rng(3);
  att.init(ps, rng);
  const Tensor<double> q = bfc_test::random_matrix(4, 8, rng);
  const Tensor<double> c = bfc_test::random_matrix(3, 8, rng);
  const std::vector<Vec2> qp{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const std::vector<Vec2> cp{{100, 0}, {0, 100}, {-100, -100}};
  const auto y = attend(att, ps, q, qp, c, cp);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto ref = layer_norm_row(q, i, ps, "att.norm");
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(y(i, j), ref[j], 1e-12);
  }
}

TEST(DistanceAttention, MatchesDenseOracle)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  bfc::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const double tau = rng.uniform(2.0, 12.0);
    const bfc::DistanceAttention att(cfg, "att", tau);
    ParamStore<double> ps;
    att.init(ps, rng);
    const Tensor<double> q = bfc_test::random_matrix(15, 8, rng);
    const Tensor<double> c = bfc_test::random_matrix(20, 8, rng);
    const auto qp = random_points(15, 10.0, rng);
    const auto cp = random_points(20, 10.0, rng);
    const auto y = attend(att, ps, q, qp, c, cp);
    const auto ref = bfc_test::dense_distance_attention(bfc_test::from_tensor(q), qp, bfc_test::from_tensor(c), cp,
                                                        tau, cfg.input_scale, ps, "att");
    for (std::size_t i = 0; i < 15; ++i) {
      for (std::size_t j = 0; j < 8; ++j) ASSERT_NEAR(y(i, j), ref[i][j], 1e-6);
    }
  }
}

TEST(DistanceAttention, NeighbourhoodIsStrictAndMonotoneInTau)
{
  const std::vector<Vec2> q{{0.0, 0.0}};
  const std::vector<Vec2> c{{3.0, 4.0}};
  EXPECT_TRUE(bfc::neighbor_pairs(q, c, 5.0, false).empty());
  EXPECT_EQ(bfc::neighbor_pairs(q, c, 5.0 + 1e-9, false).size(), 1u);

  bfc::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto qp = random_points(10, 20.0, rng);
    const auto cp = random_points(12, 20.0, rng);
    const double tau = rng.uniform(0.5, 15.0);
    const auto small = bfc::neighbor_pairs(qp, cp, tau, false);
    const auto big = bfc::neighbor_pairs(qp, cp, 2.0 * tau, false);
    for (const auto & e : small) EXPECT_NE(std::find(big.begin(), big.end(), e), big.end());
  }
}

TEST(DistanceAttention, FrameMismatchIsAContractError)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  const bfc::DistanceAttention att(cfg, "att", 5.0);
  ParamStore<double> ps;
  bfc::Rng rng(6);
  att.init(ps, rng);
  const std::vector<Vec2> xy{{0.0, 0.0}};
  Tape<double> tape;
  Binding<double> p(tape, ps, false);
  const auto x = tape.constant(bfc_test::random_matrix(1, 8, rng));
  EXPECT_THROW(att(p, x, Positions{xy, "a"}, x, Positions{xy, "b"}), bfc::ContractError);
}

TEST(FusionNet, SingleActorSelfAttentionIsPassthrough)
{
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  const bfc::DistanceAttention att(cfg, "a2a", cfg.tau_actor_actor);
  ParamStore<double> ps;
  bfc::Rng rng(7);
  att.init(ps, rng);
  const Tensor<double> a = bfc_test::random_matrix(1, 8, rng);
  const std::vector<Vec2> xy{{1.0, 2.0}};
  const auto y = attend(att, ps, a, xy, a, xy, true);
  const auto ref = layer_norm_row(a, 0, ps, "a2a.norm");
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(y(0, j), ref[j], 1e-12);
}

TEST(FusionNet, OutputShapeAndTranslationInvariance)
{
  const FusionFixture fx(8);
  const auto y = fx.run();
  EXPECT_EQ(y.shape(), (bfc::Shape{3, 8}));
  const auto moved = fx.run({123.0, -45.0});
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(moved[i], y[i], 1e-9);
}

TEST(FusionNet, BlockOrderMatters)
{
  const FusionFixture fx(9);
  const auto y = fx.run();
  // Same blocks, actor-actor first instead of last.
  Tape<double> tape;
  Binding<double> p(tape, fx.ps, false);
  const Positions a{fx.actor_xy, "f"};
  const Positions l{fx.lane_xy, "f"};
  const Positions b{fx.bound_xy, "f"};
  const auto lanes = fx.net.boundary_lane(p, tape.constant(fx.lanes), tape.constant(fx.bounds), fx.matches);
  auto actors = fx.net.actor_actor(p, tape.constant(fx.actors), a, tape.constant(fx.actors), a, true);
  actors = fx.net.lane_actor(p, actors, a, lanes, l);
  actors = fx.net.boundary_actor(p, actors, a, tape.constant(fx.bounds), b);
  double diff = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) diff += std::abs(actors.value()[i] - y[i]);
  EXPECT_GT(diff, 1e-6);
}
