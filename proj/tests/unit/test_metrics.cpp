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
#include "bfc/metrics.hpp"
#include "bfc/scene.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace
{

using bfc::Forecast;
using bfc::Metric;
using bfc::Trajectory;
using bfc::Vec2;

Trajectory straight(std::size_t t, Vec2 offset = {})
{
  Trajectory s;
  for (std::size_t i = 0; i < t; ++i) s.push_back(Vec2{static_cast<double>(i), 0.0} + offset);
  return s;
}

Forecast forecast_with_endpoint_errors(const std::vector<double> & errors, const Trajectory & gt)
{
  Forecast f;
  f.scene_id = "s";
  f.actor_id = "a";
  for (double e : errors) {
    Trajectory s = gt;
    s.back() = s.back() + Vec2{0.0, e};
    f.trajectories.push_back(s);
    f.targets.push_back(s.back());
    f.confidences.push_back(1.0 / static_cast<double>(errors.size()));
  }
  return f;
}

/// Forecasts for every focal actor of `scenes`, scattered around the truth.
std::vector<Forecast> noisy_forecasts(const std::vector<bfc::Scene> & scenes, bfc::Rng & rng, double spread)
{
  std::vector<Forecast> out;
  for (const auto & sc : scenes) {
    for (const auto & a : sc.actors) {
      if (!a.is_focal || !a.future_gt) continue;
      Forecast f = bfc_test::random_forecast(rng, 6, a.future_gt->size(), spread);
      for (auto & traj : f.trajectories) {
        for (std::size_t i = 0; i < traj.size(); ++i) traj[i] = traj[i] + (*a.future_gt)[i];
      }
      for (std::size_t k = 0; k < 6; ++k) f.targets[k] = f.trajectories[k].back();
      f.scene_id = sc.id;
      f.actor_id = a.id;
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace

TEST(MinFde, Examples)
{
  const Trajectory gt = straight(5);
  const auto f = forecast_with_endpoint_errors({3.0, 1.0, 2.0, 4.0, 5.0, 6.0}, gt);
  const auto sel = bfc::min_fde(f.trajectories, f.confidences, gt, 6);
  EXPECT_DOUBLE_EQ(sel.value, 1.0);
  EXPECT_EQ(sel.best_mode, 1u);

  const auto exact = forecast_with_endpoint_errors({3.0, 0.0}, gt);
  EXPECT_DOUBLE_EQ(bfc::min_fde(exact.trajectories, exact.confidences, gt, 2).value, 0.0);
  EXPECT_THROW(bfc::min_fde(exact.trajectories, exact.confidences, gt, 6), bfc::ContractError);
}

TEST(MinFde, KOneUsesTheTopConfidenceMode)
{
  const Trajectory gt = straight(5);
  auto f = forecast_with_endpoint_errors({3.0, 1.0, 2.0, 4.0, 5.0, 0.5}, gt);
  f.confidences = {0.1, 0.1, 0.5, 0.1, 0.1, 0.1};
  const auto sel = bfc::min_fde(f.trajectories, f.confidences, gt, 1);
  EXPECT_DOUBLE_EQ(sel.value, 2.0);
  EXPECT_EQ(sel.best_mode, 2u);
  // Ties go to the lower index.
  f.confidences = {0.1, 0.3, 0.3, 0.1, 0.1, 0.1};
  EXPECT_EQ(bfc::min_fde(f.trajectories, f.confidences, gt, 1).best_mode, 1u);
}

TEST(MinAde, Examples)
{
  const Trajectory gt = straight(6);
  const std::vector<Trajectory> modes{straight(6, {0.0, 1.0}), straight(6, {0.0, 3.0})};
  const std::vector<double> conf{0.5, 0.5};
  EXPECT_DOUBLE_EQ(bfc::min_ade(modes, conf, gt, 2).value, 1.0);
  const std::vector<Trajectory> perfect{straight(6, {0.0, 1.0}), gt};
  EXPECT_DOUBLE_EQ(bfc::min_ade(perfect, conf, gt, 2).value, 0.0);
}

TEST(Brier, Examples)
{
  EXPECT_DOUBLE_EQ(bfc::brier(1.7, 1.0), 1.7);
  EXPECT_DOUBLE_EQ(bfc::brier(1.0, 0.5), 1.25);
  bfc::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double m = rng.uniform(0.0, 10.0);
    EXPECT_GE(bfc::brier(m, rng.uniform()), m);
  }
}

TEST(MissRate, Examples)
{
  const Trajectory gt = straight(5);
  std::vector<Forecast> fs;
  std::vector<std::vector<Vec2>> gts;
  for (int i = 0; i < 4; ++i) {
    fs.push_back(forecast_with_endpoint_errors(std::vector<double>(6, i == 2 ? 3.0 : 0.0), gt));
    gts.push_back(gt);
  }
  EXPECT_DOUBLE_EQ(bfc::miss_rate(fs, gts, 6), 0.25);
  fs[2] = forecast_with_endpoint_errors(std::vector<double>(6, 0.0), gt);
  EXPECT_DOUBLE_EQ(bfc::miss_rate(fs, gts, 6), 0.0);
  EXPECT_DOUBLE_EQ(bfc::miss_rate(fs, gts, 1), 0.0);
  // Exactly 2 m is not a miss.
  fs[0] = forecast_with_endpoint_errors(std::vector<double>(6, 2.0), gt);
  EXPECT_DOUBLE_EQ(bfc::miss_rate(fs, gts, 6), 0.0);
}

TEST(ActorMetrics, MatchBruteForce)
{
  bfc::Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Forecast f = bfc_test::random_forecast(rng, 6, 8, 2.0);
    std::vector<Vec2> gt;
    for (int i = 0; i < 8; ++i) gt.push_back({rng.normal() * 2.0, rng.normal() * 2.0});
    const auto v = bfc::actor_metrics(f, gt);
    const auto b = bfc_test::brute_metrics(f, gt);
    const std::array<double, 8> want{b.brier_fde6, b.fde6, b.fde1, b.brier_ade6, b.ade6, b.ade1, b.mr6, b.mr1};
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(v[i], want[i], 1e-12) << bfc::metric_name(static_cast<Metric>(i));
  }
}

TEST(Evaluate, ColumnsInReportOrder)
{
  const std::vector<std::string> want{"brier-minFDE(6)", "minFDE(6)", "minFDE(1)", "brier-minADE(6)",
                                      "minADE(6)",       "minADE(1)", "MR(6)",     "MR(1)"};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(bfc::metric_name(static_cast<Metric>(i)), want[i]);
  bfc::MetricReport r;
  const auto j = nlohmann::ordered_json::parse(r.to_json("abc"));
  std::vector<std::string> keys;
  for (const auto & [k, v] : j["metrics"].items()) keys.push_back(k);
  EXPECT_EQ(keys, want);
  EXPECT_EQ(j["config_hash"], "abc");
  const std::string table = r.to_table();
  std::size_t pos = 0;
  for (const auto & name : want) {
    const auto next = table.find(name, pos);
    ASSERT_NE(next, std::string::npos) << name;
    pos = next + name.size();
  }
}

TEST(Evaluate, DatasetMeanOfBruteForceActors)
{
  const bfc::ModelConfig cfg = bfc_test::small_config();
  bfc::Rng rng(3);
  std::vector<bfc::Scene> scenes;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto gen = bfc_test::scene_config(cfg, 4);
    gen.num_focal = 2;
    scenes.push_back(bfc::generate_synthetic(gen, s));
  }
  const auto preds = noisy_forecasts(scenes, rng, 1.5);
  const auto report = bfc::evaluate(preds, scenes);
  std::array<double, 8> sum{};
  for (const auto & f : preds) {
    const auto & sc = *std::find_if(scenes.begin(), scenes.end(), [&](const auto & s) { return s.id == f.scene_id; });
    const auto b = bfc_test::brute_metrics(f, *sc.find_actor(f.actor_id)->future_gt);
    const std::array<double, 8> v{b.brier_fde6, b.fde6, b.fde1, b.brier_ade6, b.ade6, b.ade1, b.mr6, b.mr1};
    for (std::size_t i = 0; i < 8; ++i) sum[i] += v[i];
  }
  EXPECT_EQ(report.actors, preds.size());
  EXPECT_EQ(report.scenes, 5u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(report.values[i], sum[i] / preds.size(), 1e-12);
  EXPECT_TRUE(report.invariant_violations().empty());
}

TEST(Evaluate, SingleActorAndSelfEvaluation)
{
  const bfc::ModelConfig cfg = bfc_test::small_config();
  auto gen = bfc_test::scene_config(cfg, 2);
  const std::vector<bfc::Scene> scenes{bfc::generate_synthetic(gen, 9)};
  bfc::Rng rng(4);
  auto preds = noisy_forecasts(scenes, rng, 1.0);
  ASSERT_EQ(preds.size(), 1u);
  const auto & gt = *scenes[0].find_actor(preds[0].actor_id)->future_gt;
  const auto single = bfc::evaluate(preds, scenes);
  EXPECT_EQ(single.values, bfc::actor_metrics(preds[0], gt));

  // Mode 0 is the truth and the most confident.
  preds[0].trajectories[0] = gt;
  preds[0].confidences = {0.5, 0.1, 0.1, 0.1, 0.1, 0.1};
  const auto self = bfc::evaluate(preds, scenes);
  for (Metric m : {Metric::min_ade6, Metric::min_fde6, Metric::min_ade1, Metric::min_fde1, Metric::mr6, Metric::mr1}) {
    EXPECT_EQ(self[m], 0.0) << bfc::metric_name(m);
  }
}

TEST(Evaluate, MissingPredictionNamesTheKey)
{
  const bfc::ModelConfig cfg = bfc_test::small_config();
  const std::vector<bfc::Scene> scenes{bfc::generate_synthetic(bfc_test::scene_config(cfg), 1)};
  try {
    bfc::evaluate(std::vector<Forecast>{}, scenes);
    FAIL() << "expected EvaluationError";
  } catch (const bfc::EvaluationError & e) {
    EXPECT_NE(std::string(e.what()).find(scenes[0].id + "/" + bfc_test::first_focal(scenes[0]).id), std::string::npos);
  }
}

TEST(Evaluate, InvariantsHoldOnRandomInputs)
{
  bfc::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Forecast> fs;
    std::vector<std::vector<Vec2>> gts;
    for (int a = 0; a < 5; ++a) {
      fs.push_back(bfc_test::random_forecast(rng, 6, 6, rng.uniform(0.1, 4.0)));
      std::vector<Vec2> gt;
      for (int i = 0; i < 6; ++i) gt.push_back({rng.normal(), rng.normal()});
      gts.push_back(gt);
    }
    EXPECT_LE(bfc::miss_rate(fs, gts, 6), bfc::miss_rate(fs, gts, 1));
    bfc::MetricReport r;
    for (std::size_t a = 0; a < fs.size(); ++a) {
      const auto v = bfc::actor_metrics(fs[a], gts[a]);
      for (std::size_t i = 0; i < 8; ++i) r.values[i] += v[i] / 5.0;
    }
    EXPECT_TRUE(r.invariant_violations().empty());
  }
}
