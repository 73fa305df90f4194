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

#ifndef BFC__FUSION_HPP_
#define BFC__FUSION_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/geometry.hpp"
#include "bfc/model_config.hpp"
#include "bfc/nn.hpp"
#include "bfc/param_store.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bfc
{

/// Metric positions tagged with the frame they are expressed in (the actor
/// id of an agent-centric frame, empty for world).
struct Positions
{
  std::span<const Vec2> xy;
  std::string frame;
};

/// Query/context pairs closer than `tau` (strictly), in query-major order.
/// With `exclude_self` the pair (i, i) is skipped.
std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(
  std::span<const Vec2> query, std::span<const Vec2> context, double tau, bool exclude_self);

/// Per lane node, the mean of its matched boundary features is concatenated
/// with the lane feature and passed through an MLP; the result is added back
/// and layer-normalized. Unmatched nodes see a zero context.
class BoundaryToLane
{
public:
  BoundaryToLane() = default;
  BoundaryToLane(const ModelConfig & config, const std::string & name);

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  template <typename T>
  Var<T> operator()(
    Binding<T> & p, const Var<T> & lanes, const Var<T> & boundaries,
    const std::vector<std::vector<std::size_t>> & matches) const;

private:
  std::size_t dim_ = 0;
  nn::Mlp mlp_;
  nn::LayerNorm norm_;
};

/// For every query i and context j within tau:
///   m_ij = W_ctx [phi(pos_j - pos_i), ctx_j]
///   out_i = layer_norm(q_i + W_out sum_j relu(m_ij + W_q q_i))
class DistanceAttention
{
public:
  DistanceAttention() = default;
  DistanceAttention(const ModelConfig & config, const std::string & name, double tau);

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// Throws ContractError when the two position sets are in different frames.
  template <typename T>
  Var<T> operator()(
    Binding<T> & p, const Var<T> & query, const Positions & query_pos, const Var<T> & context,
    const Positions & context_pos, bool exclude_self = false) const;

  double tau() const { return tau_; }
  void set_tau(double tau) { tau_ = tau; }

private:
  double tau_ = 0.0;
  double input_scale_ = 1.0;
  nn::Linear query_;
  nn::Linear relative_;
  nn::Linear context_;
  nn::Linear output_;
  nn::LayerNorm norm_;
};

struct FusionInputs
{
  Positions actors;
  Positions lanes;
  Positions boundaries;
  const std::vector<std::vector<std::size_t>> * lane_matches = nullptr;
};

/// boundary -> lane, lane -> actor, boundary -> actor, actor -> actor.
class FusionNet
{
public:
  FusionNet() = default;
  FusionNet(const ModelConfig & config, const std::string & name = "fuse");

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// Updated actor features [A, D].
  template <typename T>
  Var<T> operator()(
    Binding<T> & p, const Var<T> & actors, const Var<T> & lanes, const Var<T> & boundaries,
    const FusionInputs & in) const;

  BoundaryToLane boundary_lane;
  DistanceAttention lane_actor;
  DistanceAttention boundary_actor;
  DistanceAttention actor_actor;
};

}  // namespace bfc

#endif  // BFC__FUSION_HPP_
