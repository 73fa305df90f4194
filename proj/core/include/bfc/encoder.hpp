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

#ifndef BFC__ENCODER_HPP_
#define BFC__ENCODER_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/model_config.hpp"
#include "bfc/nn.hpp"
#include "bfc/param_store.hpp"
#include "bfc/scene.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace bfc
{

struct ActorInputs
{
  std::size_t steps = 0;
  Tensor<double> coords;      // [A, H, 2], zero where unobserved
  Tensor<double> headings;    // [A, H, 2] as (cos, sin)
  Tensor<double> velocities;  // [A, H, 2]
  std::vector<std::vector<std::size_t>> observed_steps;
  std::vector<Vec2> positions;  // last observed position, meters
  std::vector<std::string> ids;

  std::size_t count() const { return positions.size(); }
};

struct LaneInputs
{
  LaneGraph graph;
  Tensor<double> features;  // [N, 5]: center, direction, length
  std::vector<Vec2> centers;
};

struct BoundaryInputs
{
  Tensor<double> features;  // [B, 10]: center, direction, marking one-hot, side one-hot
  std::vector<Vec2> centers;
  /// Per lane node, matched boundary node indices.
  std::vector<std::vector<std::size_t>> lane_matches;
};

/// Everything the network reads from one (normalized) scene. Ground-truth
/// futures are deliberately not part of it.
struct SceneInputs
{
  std::string frame;
  ActorInputs actors;
  LaneInputs lanes;
  BoundaryInputs boundaries;
};

SceneInputs prepare_inputs(const Scene & scene, const ModelConfig & config);

/// Three per-signal resnet branches summed, a trunk at temporal scales
/// {1, 2, 4} joined by a top-down FPN, then a max over observed steps.
class ActorEncoder
{
public:
  ActorEncoder() = default;
  ActorEncoder(const ModelConfig & config, const std::string & name = "enc.actor");

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// [A, D]. Throws EncodingError for actors without observed steps and
  /// ShapeError when H < 4.
  template <typename T>
  Var<T> operator()(Binding<T> & p, const ActorInputs & inputs) const;

private:
  std::size_t dim_ = 0;
  nn::ResBlock1d coord_branch_, heading_branch_, velocity_branch_;
  std::array<nn::ResBlock1d, 3> trunk_;
  std::array<nn::Conv1d, 3> lateral_;
  nn::ResBlock1d output_;
};

/// One gated lane graph convolution layer:
///   g[i, c] = sigmoid(X[i] U_c + b_c)
///   Y[i]    = X[i] W_0 + sum_c g[i, c] * sum_{j in N_c(i)} X[j] W_c
///   out     = layer_norm(relu(Y)) + X
struct GatedGraphConv
{
  nn::Linear self;
  std::array<nn::Linear, kNumAdjacency> relation;
  std::array<nn::Linear, kNumAdjacency> gate;
  nn::LayerNorm norm;

  GatedGraphConv() = default;
  GatedGraphConv(const std::string & name, std::size_t dim);

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// With `gated` false every gate is treated as 1 (plain lane graph conv).
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x, const LaneGraph & graph, bool gated = true) const;

  /// Gate values [N, 4] for inspection.
  template <typename T>
  Var<T> gates(Binding<T> & p, const Var<T> & x) const;
};

class LaneEncoder
{
public:
  LaneEncoder() = default;
  LaneEncoder(const ModelConfig & config, const std::string & name = "enc.lane");

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// [N, D]. Throws EncodingError on an empty graph.
  template <typename T>
  Var<T> operator()(Binding<T> & p, const LaneInputs & inputs) const;

  const std::vector<GatedGraphConv> & layers() const { return layers_; }

private:
  nn::Mlp input_;
  nn::LayerNorm input_norm_;
  std::vector<GatedGraphConv> layers_;
};

class BoundaryEncoder
{
public:
  BoundaryEncoder() = default;
  BoundaryEncoder(const ModelConfig & config, const std::string & name = "enc.boundary");

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  /// [B, D]; B may be zero.
  template <typename T>
  Var<T> operator()(Binding<T> & p, const BoundaryInputs & inputs) const;

private:
  std::size_t dim_ = 0;
  nn::Mlp mlp_;
  nn::LayerNorm norm_;
};

}  // namespace bfc

#endif  // BFC__ENCODER_HPP_
