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

#ifndef BFC__LOSSES_HPP_
#define BFC__LOSSES_HPP_

#include "bfc/decoder.hpp"
#include "bfc/forecast.hpp"
#include "bfc/geometry.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bfc
{

/// Endpoint error at or below this keeps an actor in the confidence loss.
inline constexpr double kConfidenceFilter = 2.0;
/// Logs are floored here so a zero predicted probability stays finite.
inline constexpr double kLogFloor = 1e-12;

using Trajectory = std::vector<Vec2>;

struct LossBreakdown
{
  double conf = 0.0;
  double target = 0.0;
  double traj = 0.0;
  double total = 0.0;
  std::size_t n_conf_kept = 0;
  std::size_t n_target = 0;
  Stage stage = Stage::S1;
};

/// Max over time steps of the pointwise L2 distance. Throws ContractError on
/// a length mismatch.
double displacement_error(std::span<const Vec2> s, std::span<const Vec2> gt);

/// Max-entropy ground-truth distribution exp(-D_k) / sum_i exp(-D_i),
/// stabilized by subtracting the smallest D.
std::vector<double> gt_confidence_from_errors(std::span<const double> errors);
std::vector<double> gt_confidence(std::span<const Trajectory> modes, std::span<const Vec2> gt);

/// KL(p_true || p_pred) with 0 log 0 = 0 and logs floored at kLogFloor.
double kl_divergence(std::span<const double> p_true, std::span<const double> p_pred);

/// Mean KL over the given actors.
double confidence_loss(
  std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> ground_truth);

/// True iff the best endpoint is within kConfidenceFilter (inclusive).
bool conf_keep(std::span<const Vec2> targets, Vec2 gt_end);

/// Index of the target closest to `gt_end`; ties go to the lowest index.
std::size_t winner_mode(std::span<const Vec2> targets, Vec2 gt_end);

double smooth_l1(double x, double beta = 1.0);

/// Per actor: the K predicted targets, the ground-truth endpoint and whether
/// the actor is observed at the last history step.
struct TargetSample
{
  std::vector<Vec2> targets;
  Vec2 gt_end{};
  bool observed_last = true;
};

/// Winner-take-all smooth L1 on the winning target, averaged over the two
/// components and then over the masked-in actors.
double target_loss(std::span<const TargetSample> samples, std::size_t * n_target = nullptr);

/// Smooth L1 over steps [0, T-2] of the winning mode (winner picked by target
/// endpoint), mean over components, normalized by N (T - 1).
double trajectory_loss(
  std::span<const TargetSample> samples, std::span<const std::vector<Trajectory>> trajectories,
  std::span<const Trajectory> gt);

/// Combines components; throws ContractError when `traj` is given in S1.
LossBreakdown total_loss(
  Stage stage, double conf, double target, std::optional<double> traj, std::size_t n_conf_kept = 0,
  std::size_t n_target = 0);

/// One actor row of a decoder output paired with its ground truth.
template <typename T>
struct LossItem
{
  const DecoderOutput<T> * output = nullptr;
  std::size_t row = 0;
  std::span<const Vec2> future;  // T ground-truth positions, network frame
  bool observed_last = true;
  /// Overrides the ground-truth confidence computed from the predictions
  /// (for finite-difference checks, where it must not move with the inputs).
  std::span<const double> fixed_confidence{};
};

template <typename T>
struct LossResult
{
  Var<T> total;
  LossBreakdown breakdown;
  double min_fde = 0.0;  // mean over items of the best endpoint error
};

/// The staged loss on the tape. The ground-truth confidence is computed from
/// the predictions' values and treated as a constant target.
template <typename T>
LossResult<T> staged_loss(Tape<T> & tape, std::span<const LossItem<T>> items, Stage stage);

}  // namespace bfc

#endif  // BFC__LOSSES_HPP_
