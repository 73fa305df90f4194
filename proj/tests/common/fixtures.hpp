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

#ifndef BFC_TESTS__FIXTURES_HPP_
#define BFC_TESTS__FIXTURES_HPP_

#include "bfc/encoder.hpp"
#include "bfc/model_config.hpp"
#include "bfc/rng.hpp"
#include "bfc/scene.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace bfc_test
{

inline bfc::ModelConfig small_config(std::size_t dim = 16)
{
  bfc::ModelConfig c;
  c.feature_dim = dim;
  c.graph_layers = 2;
  c.history = 10;
  c.future = 15;
  return c;
}

inline bfc::SceneGenConfig scene_config(const bfc::ModelConfig & m, int actors = 3)
{
  bfc::SceneGenConfig c;
  c.history = m.history;
  c.future = m.future;
  c.num_actors = actors;
  c.lane_length = 60.0;
  return c;
}

inline const bfc::ActorTrack & first_focal(const bfc::Scene & s)
{
  return *std::find_if(s.actors.begin(), s.actors.end(), [](const auto & a) { return a.is_focal; });
}

/// Random lane graph with `edges` edges per category and no self edges.
inline bfc::LaneGraph random_graph(std::size_t n, std::size_t edges, bfc::Rng & rng)
{
  bfc::LaneGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back({{rng.normal(), rng.normal()}, {1.0, 0.0}, 2.0, "L"});
  }
  for (auto & list : g.adjacency) {
    while (list.size() < edges) {
      const std::size_t a = rng.index(n);
      const std::size_t b = rng.index(n);
      if (a != b) list.push_back({a, b});
    }
  }
  return g;
}

/// Applies a node permutation: new node i is old node perm[i].
inline bfc::LaneGraph permute_graph(const bfc::LaneGraph & g, const std::vector<std::size_t> & perm)
{
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  bfc::LaneGraph out;
  for (std::size_t i = 0; i < perm.size(); ++i) out.nodes.push_back(g.nodes[perm[i]]);
  for (std::size_t c = 0; c < g.adjacency.size(); ++c) {
    for (const auto & e : g.adjacency[c]) out.adjacency[c].push_back({inv[e.src], inv[e.dst]});
  }
  return out;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, bfc::Rng & rng)
{
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
  return p;
}

}  // namespace bfc_test

#endif  // BFC_TESTS__FIXTURES_HPP_
