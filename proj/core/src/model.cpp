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

#include "bfc/model.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace bfc
{

Network::Network(const ModelConfig & config)
: actor_encoder(config),
  lane_encoder(config),
  boundary_encoder(config),
  fusion(config),
  decoder(config),
  config_(config)
{
  config_.validate();
}

template <typename T>
ParamStore<T> Network::init_params(std::uint64_t seed) const
{
  ParamStore<T> store;
  Rng rng(seed);
  actor_encoder.init(store, rng);
  lane_encoder.init(store, rng);
  boundary_encoder.init(store, rng);
  fusion.init(store, rng);
  decoder.init(store, rng);
  return store;
}

template <typename T>
DecoderOutput<T> Network::forward(Binding<T> & p, const SceneInputs & in, Stage stage) const
{
  const Var<T> actors = actor_encoder(p, in.actors);
  const Var<T> lanes = lane_encoder(p, in.lanes);
  const Var<T> boundaries = boundary_encoder(p, in.boundaries);
  FusionInputs fi;
  fi.actors = Positions{in.actors.positions, in.frame};
  fi.lanes = Positions{in.lanes.centers, in.frame};
  fi.boundaries = Positions{in.boundaries.centers, in.frame};
  fi.lane_matches = &in.boundaries.lane_matches;
  return decoder(p, fusion(p, actors, lanes, boundaries, fi), stage);
}

bool Network::is_stage2_param(std::string_view name)
{
  return name.starts_with(Decoder::kCompletionPrefix);
}

template <typename T>
RawForecast extract_actor(const DecoderOutput<T> & out, std::size_t actor, std::size_t horizon)
{
  const Tensor<T> & g = out.targets.value();
  const Tensor<T> & l = out.logits.value();
  const std::size_t k_modes = l.shape().at(1);
  RawForecast raw;
  for (std::size_t k = 0; k < k_modes; ++k) {
    raw.targets.push_back(
      {static_cast<double>(g(actor, 2 * k)), static_cast<double>(g(actor, 2 * k + 1))});
    raw.logits.push_back(static_cast<double>(l(actor, k)));
  }
  if (out.trajectories.valid()) {
    const Tensor<T> & s = out.trajectories.value();
    for (std::size_t k = 0; k < k_modes; ++k) {
      std::vector<Vec2> traj;
      for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t c = (k * horizon + t) * 2;
        traj.push_back({static_cast<double>(s(actor, c)), static_cast<double>(s(actor, c + 1))});
      }
      raw.trajectories.push_back(std::move(traj));
    }
  }
  return raw;
}

std::vector<double> softmax(const std::vector<double> & logits)
{
  if (logits.empty()) {
    return {};
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p;
  double z = 0.0;
  for (double v : logits) {
    p.push_back(std::exp(v - m));
    z += p.back();
  }
  for (double & v : p) {
    v /= z;
  }
  return p;
}

template <typename T>
Forecast forecast_actor(
  const Network & net, const ParamStore<T> & params, const Scene & scene, std::string_view actor_id,
  Stage stage)
{
  const ActorTrack * actor = scene.find_actor(actor_id);
  if (actor == nullptr) {
    throw NormalizationError("actor '" + std::string(actor_id) + "' not found in scene " + scene.id);
  }
  const Scene local = normalize(scene, actor_id);
  const std::size_t index = *local.actor_index(actor_id);
  const ActorState & last = actor->history.back();
  const RigidTransform tf{last.position, last.heading};

  Tape<T> tape;
  Binding<T> p(tape, params, false);
  const SceneInputs inputs = prepare_inputs(local, net.config());
  const auto horizon = static_cast<std::size_t>(net.config().future);
  const RawForecast raw = extract_actor(net.forward(p, inputs, stage), index, horizon);

  Forecast f;
  f.scene_id = scene.id;
  f.actor_id = std::string(actor_id);
  f.confidences = softmax(raw.logits);
  for (std::size_t k = 0; k < raw.targets.size(); ++k) {
    f.targets.push_back(tf.to_parent(raw.targets[k]));
    std::vector<Vec2> traj;
    if (stage == Stage::S2) {
      for (const Vec2 & q : raw.trajectories[k]) {
        traj.push_back(tf.to_parent(q));
      }
    } else {
      traj.push_back(f.targets.back());
    }
    f.trajectories.push_back(std::move(traj));
  }
  return f;
}

template <typename T>
std::vector<Forecast> forecast(
  const Network & net, const ParamStore<T> & params, const Scene & scene, Stage stage)
{
  std::vector<Forecast> out;
  for (const auto & a : scene.actors) {
    if (a.is_focal) {
      out.push_back(forecast_actor(net, params, scene, a.id, stage));
    }
  }
  return out;
}

#define BFC_INSTANTIATE_MODEL(T)                                                                  \
  template ParamStore<T> Network::init_params<T>(std::uint64_t) const;                            \
  template DecoderOutput<T> Network::forward<T>(Binding<T> &, const SceneInputs &, Stage) const;  \
  template RawForecast extract_actor<T>(const DecoderOutput<T> &, std::size_t, std::size_t);      \
  template Forecast forecast_actor<T>(                                                            \
    const Network &, const ParamStore<T> &, const Scene &, std::string_view, Stage);              \
  template std::vector<Forecast> forecast<T>(                                                     \
    const Network &, const ParamStore<T> &, const Scene &, Stage);

BFC_INSTANTIATE_MODEL(float)
BFC_INSTANTIATE_MODEL(double)

#undef BFC_INSTANTIATE_MODEL

}  // namespace bfc
