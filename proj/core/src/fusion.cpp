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

#include "bfc/fusion.hpp"

#include "bfc/errors.hpp"
#include "bfc/ops.hpp"

#include <algorithm>
#include <utility>

namespace bfc
{

std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(
  std::span<const Vec2> query, std::span<const Vec2> context, double tau, bool exclude_self)
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < query.size(); ++i) {
    for (std::size_t j = 0; j < context.size(); ++j) {
      if (exclude_self && i == j) {
        continue;
      }
      if (distance(query[i], context[j]) < tau) {
        pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

BoundaryToLane::BoundaryToLane(const ModelConfig & config, const std::string & name)
: dim_(config.feature_dim),
  mlp_(name + ".mlp", 2 * dim_, dim_, dim_),
  norm_{name + ".norm", dim_}
{
}

template <typename T>
void BoundaryToLane::init(ParamStore<T> & store, Rng & rng) const
{
  mlp_.init(store, rng);
  norm_.init(store, rng);
}

template <typename T>
Var<T> BoundaryToLane::operator()(
  Binding<T> & p, const Var<T> & lanes, const Var<T> & boundaries,
  const std::vector<std::vector<std::size_t>> & matches) const
{
  const std::size_t n = lanes.shape().at(0);
  const std::size_t b = boundaries.shape().at(0);
  if (matches.size() != n) {
    throw ShapeError(
      "boundary matching covers " + std::to_string(matches.size()) + " lane nodes, features have " +
      std::to_string(n));
  }
  Var<T> context;
  if (b == 0) {
    context = nn::constant(p, Tensor<T>({n, dim_}));
  } else {
    // Row-stochastic averaging matrix over the distinct matched nodes.
    Tensor<T> avg({n, b});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> m = matches[i];
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
      for (std::size_t j : m) {
        if (j >= b) {
          throw ShapeError("boundary match index " + std::to_string(j) + " out of range");
        }
        avg(i, j) = T(1) / static_cast<T>(m.size());
      }
    }
    context = ops::matmul(nn::constant(p, std::move(avg)), boundaries);
  }
  const Var<T> h = mlp_(p, ops::concat<T>({lanes, context}, 1));
  return norm_(p, ops::add(lanes, h));
}

DistanceAttention::DistanceAttention(const ModelConfig & config, const std::string & name, double tau)
: tau_(tau),
  input_scale_(config.input_scale),
  query_{name + ".query", config.feature_dim, config.feature_dim, false},
  relative_{name + ".relative", 2, config.feature_dim, true},
  context_{name + ".context", 2 * config.feature_dim, config.feature_dim, true},
  output_{name + ".output", config.feature_dim, config.feature_dim, false},
  norm_{name + ".norm", config.feature_dim}
{
}

template <typename T>
void DistanceAttention::init(ParamStore<T> & store, Rng & rng) const
{
  query_.init(store, rng);
  relative_.init(store, rng);
  context_.init(store, rng);
  output_.init(store, rng);
  norm_.init(store, rng);
}

template <typename T>
Var<T> DistanceAttention::operator()(
  Binding<T> & p, const Var<T> & query, const Positions & query_pos, const Var<T> & context,
  const Positions & context_pos, bool exclude_self) const
{
  if (query_pos.frame != context_pos.frame) {
    throw ContractError(
      "distance attention positions in different frames: '" + query_pos.frame + "' vs '" +
      context_pos.frame + "'");
  }
  const std::size_t nq = query.shape().at(0);
  if (query_pos.xy.size() != nq || context_pos.xy.size() != context.shape().at(0)) {
    throw ShapeError("distance attention: positions do not match feature rows");
  }
  const auto pairs = neighbor_pairs(query_pos.xy, context_pos.xy, tau_, exclude_self);
  if (pairs.empty()) {
    return norm_(p, query);
  }
  std::vector<std::size_t> qi;
  std::vector<std::size_t> cj;
  Tensor<T> rel({pairs.size(), 2});
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [i, j] = pairs[e];
    qi.push_back(i);
    cj.push_back(j);
    const Vec2 d = context_pos.xy[j] - query_pos.xy[i];
    rel(e, 0) = static_cast<T>(d.x * input_scale_);
    rel(e, 1) = static_cast<T>(d.y * input_scale_);
  }
  const Var<T> phi = relative_(p, nn::constant(p, std::move(rel)));
  const Var<T> msg = context_(p, ops::concat<T>({phi, ops::gather(context, cj)}, 1));
  const Var<T> q = ops::gather(query_(p, query), qi);
  const Var<T> agg = ops::scatter_add(ops::relu(ops::add(msg, q)), qi, nq);
  return norm_(p, ops::add(query, output_(p, agg)));
}

FusionNet::FusionNet(const ModelConfig & config, const std::string & name)
: boundary_lane(config, name + ".boundary_lane"),
  lane_actor(config, name + ".lane_actor", config.tau_lane_actor),
  boundary_actor(config, name + ".boundary_actor", config.tau_boundary_actor),
  actor_actor(config, name + ".actor_actor", config.tau_actor_actor)
{
}

template <typename T>
void FusionNet::init(ParamStore<T> & store, Rng & rng) const
{
  boundary_lane.init(store, rng);
  lane_actor.init(store, rng);
  boundary_actor.init(store, rng);
  actor_actor.init(store, rng);
}

template <typename T>
Var<T> FusionNet::operator()(
  Binding<T> & p, const Var<T> & actors, const Var<T> & lanes, const Var<T> & boundaries,
  const FusionInputs & in) const
{
  if (in.lane_matches == nullptr) {
    throw ContractError("fusion needs the boundary-to-lane matching");
  }
  const Var<T> lanes2 = boundary_lane(p, lanes, boundaries, *in.lane_matches);
  Var<T> x = lane_actor(p, actors, in.actors, lanes2, in.lanes);
  x = boundary_actor(p, x, in.actors, boundaries, in.boundaries);
  return actor_actor(p, x, in.actors, x, in.actors, true);
}

#define BFC_INSTANTIATE_FUSION(T)                                                                   \
  template void BoundaryToLane::init<T>(ParamStore<T> &, Rng &) const;                              \
  template Var<T> BoundaryToLane::operator()<T>(                                                    \
    Binding<T> &, const Var<T> &, const Var<T> &, const std::vector<std::vector<std::size_t>> &)    \
    const;                                                                                          \
  template void DistanceAttention::init<T>(ParamStore<T> &, Rng &) const;                           \
  template Var<T> DistanceAttention::operator()<T>(                                                 \
    Binding<T> &, const Var<T> &, const Positions &, const Var<T> &, const Positions &, bool)       \
    const;                                                                                          \
  template void FusionNet::init<T>(ParamStore<T> &, Rng &) const;                                   \
  template Var<T> FusionNet::operator()<T>(                                                         \
    Binding<T> &, const Var<T> &, const Var<T> &, const Var<T> &, const FusionInputs &) const;

BFC_INSTANTIATE_FUSION(float)
BFC_INSTANTIATE_FUSION(double)

#undef BFC_INSTANTIATE_FUSION

}  // namespace bfc
