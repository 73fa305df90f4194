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

#include "bfc/train.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>

namespace bfc
{

void TrainConfig::validate() const
{
  schedule.validate();
  if (batch_size == 0) {
    throw ConfigError("batch_size must be positive");
  }
  if (stage2_start_epoch != schedule.first_period) {
    throw ConfigError(
      "stage2_start_epoch (" + std::to_string(stage2_start_epoch) +
      ") must coincide with the first restart (epoch " + std::to_string(schedule.first_period) + ")");
  }
}

std::vector<TrainSample> make_samples(std::span<const Scene> scenes, const ModelConfig & config)
{
  std::vector<TrainSample> out;
  for (const Scene & scene : scenes) {
    for (const ActorTrack & a : scene.actors) {
      if (!a.is_focal || !a.future_gt || !a.observed_at_last()) {
        continue;
      }
      if (a.future_gt->size() != static_cast<std::size_t>(config.future)) {
        throw TrainingError(
          "scene " + scene.id + " actor " + a.id + ": future has " +
          std::to_string(a.future_gt->size()) + " steps, model expects " + std::to_string(config.future));
      }
      const Scene local = normalize(scene, a.id);
      TrainSample s;
      s.key = scene.id + "/" + a.id;
      s.inputs = prepare_inputs(local, config);
      s.row = *local.actor_index(a.id);
      s.future = *local.actors[s.row].future_gt;
      s.observed_last = true;
      out.push_back(std::move(s));
    }
  }
  if (out.empty()) {
    throw TrainingError("dataset contains no focal actor with a ground-truth future");
  }
  return out;
}

std::string epoch_log_json(const EpochLog & log, const std::string & config_hash)
{
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["lr"] = log.lr;
  j["stage"] = stage_name(log.loss.stage);
  j["conf"] = log.loss.conf;
  j["target"] = log.loss.target;
  j["traj"] = log.loss.stage == Stage::S2 ? nlohmann::ordered_json(log.loss.traj) : nlohmann::ordered_json();
  j["total"] = log.loss.total;
  j["minFDE6"] = log.min_fde;
  if (!config_hash.empty()) {
    j["config_hash"] = config_hash;
  }
  return j.dump();
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n)
{
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(epoch) + 1)));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.index(i)]);
  }
  return order;
}

template <typename T>
std::vector<EpochLog> train(
  const Network & net, std::span<const TrainSample> samples, const TrainConfig & config,
  TrainState<T> & state, const EpochCallback & on_epoch, std::optional<int> stop_epoch)
{
  config.validate();
  if (samples.empty()) {
    throw TrainingError("no training samples");
  }
  const int end = std::min(stop_epoch.value_or(config.total_epochs()), config.total_epochs());
  std::vector<EpochLog> logs;
  for (int epoch = state.next_epoch; epoch < end; ++epoch) {
    const Stage stage = epoch < config.stage2_start_epoch ? Stage::S1 : Stage::S2;
    const double lr = config.schedule.lr_at(epoch);
    const auto order = epoch_order(config.seed, epoch, samples.size());

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    double conf = 0.0;
    double target = 0.0;
    double traj = 0.0;
    double fde = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), begin + config.batch_size);
      Tape<T> tape;
      Binding<T> p(tape, state.params, true);
      std::vector<DecoderOutput<T>> outputs;
      outputs.reserve(stop - begin);
      std::vector<LossItem<T>> items;
      for (std::size_t i = begin; i < stop; ++i) {
        const TrainSample & s = samples[order[i]];
        outputs.push_back(net.forward(p, s.inputs, stage));
        items.push_back({&outputs.back(), s.row, s.future, s.observed_last});
      }
      const LossResult<T> loss = staged_loss<T>(tape, items, stage);
      const LossBreakdown & b = loss.breakdown;
      for (const auto & [name, v] : {std::pair{"conf", b.conf}, {"target", b.target}, {"traj", b.traj}}) {
        if (!std::isfinite(v)) {
          throw TrainingError(
            "non-finite " + std::string(name) + " loss at epoch " + std::to_string(epoch) + ", batch " +
            std::to_string(batch_index));
        }
      }
      const ParamStore<T> grads = backward(loss.total, p);
      if (stage == Stage::S1) {
        state.optimizer.step(state.params, grads, lr, [](const std::string & n) {
          return !Network::is_stage2_param(n);
        });
      } else {
        state.optimizer.step(state.params, grads, lr);
      }
      const auto w = static_cast<double>(stop - begin);
      conf += w * b.conf;
      target += w * b.target;
      traj += w * b.traj;
      fde += w * loss.min_fde;
    }
    const auto n = static_cast<double>(samples.size());
    log.loss = total_loss(
      stage, conf / n, target / n, stage == Stage::S2 ? std::optional<double>(traj / n) : std::nullopt);
    log.min_fde = fde / n;
    state.next_epoch = epoch + 1;
    logs.push_back(log);
    if (on_epoch) {
      on_epoch(log);
    }
  }
  return logs;
}

template std::vector<EpochLog> train<float>(
  const Network &, std::span<const TrainSample>, const TrainConfig &, TrainState<float> &,
  const EpochCallback &, std::optional<int>);
template std::vector<EpochLog> train<double>(
  const Network &, std::span<const TrainSample>, const TrainConfig &, TrainState<double> &,
  const EpochCallback &, std::optional<int>);

}  // namespace bfc
