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

#ifndef BFC__TRAIN_HPP_
#define BFC__TRAIN_HPP_

#include "bfc/encoder.hpp"
#include "bfc/losses.hpp"
#include "bfc/model.hpp"
#include "bfc/optim.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bfc
{

struct TrainConfig
{
  std::size_t batch_size = 32;
  int stage2_start_epoch = 6;
  std::uint64_t seed = 0;
  LrSchedule schedule{};

  int total_epochs() const { return schedule.total_epochs; }

  /// Throws ConfigError. The second stage must start at the first restart.
  void validate() const;
};

/// One (scene, focal actor) pair in that actor's frame.
struct TrainSample
{
  std::string key;
  SceneInputs inputs;
  std::size_t row = 0;
  std::vector<Vec2> future;
  bool observed_last = true;
};

/// Every focal actor with a ground-truth future. Throws TrainingError when
/// the dataset yields no samples.
std::vector<TrainSample> make_samples(std::span<const Scene> scenes, const ModelConfig & config);

struct EpochLog
{
  int epoch = 0;
  double lr = 0.0;
  LossBreakdown loss;  // sample-weighted mean over batches
  double min_fde = 0.0;
};

/// {"epoch","lr","stage","conf","target","traj","total","minFDE6"}; "traj"
/// is null in stage S1.
std::string epoch_log_json(const EpochLog & log, const std::string & config_hash = "");

template <typename T>
struct TrainState
{
  ParamStore<T> params;
  NAdam<T> optimizer;
  int next_epoch = 0;
};

using EpochCallback = std::function<void(const EpochLog &)>;

/// Two-stage training. Stage-2 parameters are outside the optimizer's active
/// set before `stage2_start_epoch`. Throws TrainingError on a non-finite loss.
template <typename T>
std::vector<EpochLog> train(
  const Network & net, std::span<const TrainSample> samples, const TrainConfig & config,
  TrainState<T> & state, const EpochCallback & on_epoch = {}, std::optional<int> stop_epoch = {});

/// Batch order for one epoch; a pure function of (seed, epoch, n).
std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n);

}  // namespace bfc

#endif  // BFC__TRAIN_HPP_
