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

#include "bfc/autodiff.hpp"
#include "bfc/encoder.hpp"
#include "bfc/ensemble.hpp"
#include "bfc/model.hpp"
#include "bfc/ops.hpp"
#include "bfc/scene.hpp"

#include <benchmark/benchmark.h>

namespace
{

bfc::Tensor<float> random_tensor(bfc::Shape shape, bfc::Rng & rng)
{
  bfc::Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal());
  return t;
}

void BM_Matmul(benchmark::State & state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  bfc::Rng rng(1);
  const auto a = random_tensor({n, n}, rng);
  const auto b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    bfc::Tape<float> tape;
    benchmark::DoNotOptimize(bfc::ops::matmul(tape.constant(a), tape.constant(b)).value().raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_Conv1d(benchmark::State & state)
{
  const auto c = static_cast<std::size_t>(state.range(0));
  bfc::Rng rng(2);
  const auto x = random_tensor({20, c}, rng);
  const auto w = random_tensor({c, c, 3}, rng);
  for (auto _ : state) {
    bfc::Tape<float> tape;
    benchmark::DoNotOptimize(
      bfc::ops::conv1d(tape.constant(x), tape.constant(w), bfc::Var<float>{}, 1, 1).value().raw());
  }
}
BENCHMARK(BM_Conv1d)->Arg(32)->Arg(64);

void BM_GatedGraphConv(benchmark::State & state)
{
  bfc::SceneGenConfig gen;
  gen.num_lanes = static_cast<int>(state.range(0));
  const bfc::Scene scene = bfc::generate_synthetic(gen, 3);
  const bfc::GatedGraphConv conv("conv", 32);
  bfc::ParamStore<float> ps;
  bfc::Rng rng(3);
  conv.init(ps, rng);
  const auto x = random_tensor({scene.lane_graph.nodes.size(), 32}, rng);
  for (auto _ : state) {
    bfc::Tape<float> tape;
    bfc::Binding<float> p(tape, ps, false);
    benchmark::DoNotOptimize(conv(p, tape.constant(x), scene.lane_graph).value().raw());
  }
  state.counters["nodes"] = static_cast<double>(scene.lane_graph.nodes.size());
}
BENCHMARK(BM_GatedGraphConv)->Arg(2)->Arg(4);

void BM_ForwardBackward(benchmark::State & state)
{
  bfc::ModelConfig cfg;
  cfg.feature_dim = static_cast<std::size_t>(state.range(0));
  cfg.graph_layers = 2;
  const bfc::Network net(cfg);
  const auto params = net.init_params<float>(4);
  bfc::SceneGenConfig gen;
  gen.lane_length = 60.0;
  const bfc::Scene scene = bfc::generate_synthetic(gen, 4);
  const bfc::Scene local = bfc::normalize(scene, scene.actors.front().id);
  const auto inputs = bfc::prepare_inputs(local, cfg);
  for (auto _ : state) {
    bfc::Tape<float> tape;
    bfc::Binding<float> p(tape, params, true);
    const auto out = net.forward(p, inputs, bfc::Stage::S2);
    const auto loss = bfc::ops::sum_all(bfc::ops::mul(out.trajectories, out.trajectories));
    benchmark::DoNotOptimize(bfc::backward(loss, p));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_WeightedKMeans(benchmark::State & state)
{
  bfc::Rng rng(5);
  std::vector<bfc::Vec2> pts;
  std::vector<double> w;
  for (int i = 0; i < state.range(0); ++i) {
    pts.push_back({rng.normal() * 20.0, rng.normal() * 20.0});
    w.push_back(rng.uniform());
  }
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bfc::weighted_kmeans(pts, w, 6, seed++).centers.data());
  }
}
BENCHMARK(BM_WeightedKMeans)->Arg(42)->Arg(420);

}  // namespace

BENCHMARK_MAIN();
