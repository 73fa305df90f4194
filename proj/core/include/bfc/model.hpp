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

#ifndef BFC__MODEL_HPP_
#define BFC__MODEL_HPP_

#include "bfc/decoder.hpp"
#include "bfc/encoder.hpp"
#include "bfc/forecast.hpp"
#include "bfc/fusion.hpp"
#include "bfc/model_config.hpp"
#include "bfc/scene.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bfc
{

/// Encoder, fusion and decoder wired together.
class Network
{
public:
  explicit Network(const ModelConfig & config = {});

  const ModelConfig & config() const { return config_; }

  template <typename T>
  ParamStore<T> init_params(std::uint64_t seed) const;

  template <typename T>
  DecoderOutput<T> forward(Binding<T> & p, const SceneInputs & inputs, Stage stage) const;

  /// True for parameters that only the stage-two trajectory completion uses.
  static bool is_stage2_param(std::string_view name);

  ActorEncoder actor_encoder;
  LaneEncoder lane_encoder;
  BoundaryEncoder boundary_encoder;
  FusionNet fusion;
  Decoder decoder;

private:
  ModelConfig config_;
};

/// Decoded outputs for one actor, still in the network's frame.
struct RawForecast
{
  std::vector<Vec2> targets;                    // [K]
  std::vector<double> logits;                   // [K]
  std::vector<std::vector<Vec2>> trajectories;  // [K][T]; empty in stage S1
};

template <typename T>
RawForecast extract_actor(const DecoderOutput<T> & out, std::size_t actor, std::size_t horizon);

/// Runs the network for one focal actor in its own agent-centric frame and
/// maps the outputs back into the frame of `scene`. In stage S1 every
/// trajectory holds only the target point.
template <typename T>
Forecast forecast_actor(
  const Network & net, const ParamStore<T> & params, const Scene & scene, std::string_view actor_id,
  Stage stage);

/// One Forecast per focal actor, in actor order.
template <typename T>
std::vector<Forecast> forecast(
  const Network & net, const ParamStore<T> & params, const Scene & scene, Stage stage);

/// Numerically stable softmax of a logit vector.
std::vector<double> softmax(const std::vector<double> & logits);

}  // namespace bfc

#endif  // BFC__MODEL_HPP_
