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

#include "bfc/losses.hpp"

#include "bfc/errors.hpp"
#include "bfc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bfc
{

double displacement_error(std::span<const Vec2> s, std::span<const Vec2> gt)
{
  if (s.size() != gt.size()) {
    throw ContractError(
      "displacement_error: " + std::to_string(s.size()) + " vs " + std::to_string(gt.size()) +
      " steps");
  }
  double d = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    d = std::max(d, distance(s[t], gt[t]));
  }
  return d;
}

std::vector<double> gt_confidence_from_errors(std::span<const double> errors)
{
  if (errors.empty()) {
    return {};
  }
  const double lo = *std::min_element(errors.begin(), errors.end());
  std::vector<double> c;
  double z = 0.0;
  for (double e : errors) {
    c.push_back(std::exp(-(e - lo)));
    z += c.back();
  }
  for (double & v : c) {
    v /= z;
  }
  return c;
}

std::vector<double> gt_confidence(std::span<const Trajectory> modes, std::span<const Vec2> gt)
{
  std::vector<double> errors;
  for (const auto & m : modes) {
    errors.push_back(displacement_error(m, gt));
  }
  return gt_confidence_from_errors(errors);
}

double kl_divergence(std::span<const double> p_true, std::span<const double> p_pred)
{
  if (p_true.size() != p_pred.size()) {
    throw ContractError("kl_divergence: distributions differ in length");
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < p_true.size(); ++k) {
    if (p_true[k] <= 0.0) {
      continue;
    }
    kl += p_true[k] * (std::log(std::max(p_true[k], kLogFloor)) - std::log(std::max(p_pred[k], kLogFloor)));
  }
  return kl;
}

double confidence_loss(
  std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> ground_truth)
{
  if (predicted.size() != ground_truth.size()) {
    throw ContractError("confidence_loss: actor counts differ");
  }
  if (predicted.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += kl_divergence(ground_truth[i], predicted[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

bool conf_keep(std::span<const Vec2> targets, Vec2 gt_end)
{
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2 & g : targets) {
    best = std::min(best, distance(g, gt_end));
  }
  return best <= kConfidenceFilter;
}

std::size_t winner_mode(std::span<const Vec2> targets, Vec2 gt_end)
{
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double d = distance(targets[k], gt_end);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

double smooth_l1(double x, double beta)
{
  const double a = std::abs(x);
  return a < beta ? 0.5 * a * a / beta : a - 0.5 * beta;
}

double target_loss(std::span<const TargetSample> samples, std::size_t * n_target)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto & s : samples) {
    if (!s.observed_last) {
      continue;
    }
    const Vec2 g = s.targets[winner_mode(s.targets, s.gt_end)];
    sum += 0.5 * (smooth_l1(g.x - s.gt_end.x) + smooth_l1(g.y - s.gt_end.y));
    ++n;
  }
  if (n_target != nullptr) {
    *n_target = n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double trajectory_loss(
  std::span<const TargetSample> samples, std::span<const std::vector<Trajectory>> trajectories,
  std::span<const Trajectory> gt)
{
  if (samples.size() != trajectories.size() || samples.size() != gt.size()) {
    throw ContractError("trajectory_loss: sample counts differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].observed_last) {
      continue;
    }
    const Trajectory & s = trajectories[i][winner_mode(samples[i].targets, samples[i].gt_end)];
    if (s.size() < 2 || s.size() != gt[i].size()) {
      throw ContractError("trajectory_loss needs matching horizons of at least 2 steps");
    }
    steps = s.size() - 1;
    for (std::size_t t = 0; t < steps; ++t) {
      sum += 0.5 * (smooth_l1(s[t].x - gt[i][t].x) + smooth_l1(s[t].y - gt[i][t].y));
    }
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n * steps);
}

LossBreakdown total_loss(
  Stage stage, double conf, double target, std::optional<double> traj, std::size_t n_conf_kept,
  std::size_t n_target)
{
  if (stage == Stage::S1 && traj.has_value()) {
    throw ContractError("trajectory loss supplied in stage S1");
  }
  LossBreakdown b;
  b.stage = stage;
  b.conf = conf;
  b.target = target;
  b.traj = traj.value_or(0.0);
  b.total = conf + target + b.traj;
  b.n_conf_kept = n_conf_kept;
  b.n_target = n_target;
  return b;
}

template <typename T>
LossResult<T> staged_loss(Tape<T> & tape, std::span<const LossItem<T>> items, Stage stage)
{
  if (items.empty()) {
    throw ContractError("staged_loss needs at least one item");
  }
  LossResult<T> result;
  std::vector<Var<T>> kept_logits;
  std::vector<T> kept_truth;
  double truth_entropy = 0.0;  // sum of p log p over kept actors
  std::vector<Var<T>> win_targets;
  std::vector<T> gt_targets;
  std::vector<Var<T>> win_steps;
  std::vector<T> gt_steps;
  double fde_sum = 0.0;

  for (const auto & item : items) {
    const DecoderOutput<T> & out = *item.output;
    const std::size_t k_modes = out.logits.shape().at(1);
    const std::size_t horizon = item.future.size();
    if (horizon < 2) {
      throw ContractError("staged_loss needs a future of at least 2 steps");
    }
    const Vec2 gt_end = item.future.back();
    const Tensor<T> & tv = out.targets.value();
    std::vector<Vec2> targets;
    for (std::size_t k = 0; k < k_modes; ++k) {
      targets.push_back(
        {static_cast<double>(tv(item.row, 2 * k)), static_cast<double>(tv(item.row, 2 * k + 1))});
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2 & g : targets) {
      best = std::min(best, distance(g, gt_end));
    }
    fde_sum += best;

    // Confidence term.
    if (conf_keep(targets, gt_end)) {
      std::vector<double> errors;
      if (stage == Stage::S1) {
        for (const Vec2 & g : targets) {
          errors.push_back(distance(g, gt_end));
        }
      } else {
        const Tensor<T> & sv = out.trajectories.value();
        for (std::size_t k = 0; k < k_modes; ++k) {
          double d = 0.0;
          for (std::size_t t = 0; t < horizon; ++t) {
            const std::size_t c = (k * horizon + t) * 2;
            const Vec2 q{static_cast<double>(sv(item.row, c)), static_cast<double>(sv(item.row, c + 1))};
            d = std::max(d, distance(q, item.future[t]));
          }
          errors.push_back(d);
        }
      }
      std::vector<double> truth = gt_confidence_from_errors(errors);
      if (!item.fixed_confidence.empty()) {
        if (item.fixed_confidence.size() != k_modes) {
          throw ContractError("fixed confidence has the wrong number of modes");
        }
        truth.assign(item.fixed_confidence.begin(), item.fixed_confidence.end());
      }
      for (double p : truth) {
        kept_truth.push_back(static_cast<T>(p));
        if (p > 0.0) {
          truth_entropy += p * std::log(p);
        }
      }
      kept_logits.push_back(ops::gather(out.logits, {item.row}));
    }

    if (!item.observed_last) {
      continue;
    }
    const std::size_t k_star = winner_mode(targets, gt_end);
    win_targets.push_back(ops::slice(ops::gather(out.targets, {item.row}), 1, 2 * k_star, 2));
    gt_targets.push_back(static_cast<T>(gt_end.x));
    gt_targets.push_back(static_cast<T>(gt_end.y));
    if (stage == Stage::S2) {
      const Var<T> row = ops::gather(out.trajectories, {item.row});
      win_steps.push_back(ops::slice(row, 1, k_star * horizon * 2, (horizon - 1) * 2));
      for (std::size_t t = 0; t + 1 < horizon; ++t) {
        gt_steps.push_back(static_cast<T>(item.future[t].x));
        gt_steps.push_back(static_cast<T>(item.future[t].y));
      }
    }
  }
  result.min_fde = fde_sum / static_cast<double>(items.size());

  Var<T> total = tape.constant(Tensor<T>::scalar(T(0)));
  double conf = 0.0;
  double target = 0.0;
  std::optional<double> traj;
  const std::size_t n_kept = kept_logits.size();
  if (n_kept > 0) {
    const std::size_t k_modes = kept_truth.size() / n_kept;
    const Var<T> log_c = ops::log_softmax(ops::concat(kept_logits, 0), 1);
    const Var<T> truth = tape.constant(Tensor<T>({n_kept, k_modes}, std::move(kept_truth)));
    // KL = (sum p log p - sum p log c) / n
    const Var<T> cross = ops::scale(ops::sum_all(ops::mul(truth, log_c)), T(-1) / static_cast<T>(n_kept));
    const Var<T> term = ops::add(
      cross, tape.constant(Tensor<T>::scalar(static_cast<T>(truth_entropy / static_cast<double>(n_kept)))));
    // Float rounding can leave a perfectly matched KL a hair below zero.
    conf = std::max(0.0, static_cast<double>(term.value().item()));
    total = ops::add(total, term);
  }
  const std::size_t n_target = win_targets.size();
  if (n_target > 0) {
    const Var<T> gt = tape.constant(Tensor<T>({n_target, 2}, std::move(gt_targets)));
    const Var<T> term = ops::mean_all(ops::smooth_l1(ops::concat(win_targets, 0), gt));
    target = static_cast<double>(term.value().item());
    total = ops::add(total, term);
    if (stage == Stage::S2) {
      const std::size_t width = gt_steps.size() / n_target;
      const Var<T> gs = tape.constant(Tensor<T>({n_target, width}, std::move(gt_steps)));
      const Var<T> tterm = ops::mean_all(ops::smooth_l1(ops::concat(win_steps, 0), gs));
      traj = static_cast<double>(tterm.value().item());
      total = ops::add(total, tterm);
    }
  } else if (stage == Stage::S2) {
    traj = 0.0;
  }
  result.total = total;
  result.breakdown = total_loss(stage, conf, target, traj, n_kept, n_target);
  return result;
}

template LossResult<float> staged_loss<float>(Tape<float> &, std::span<const LossItem<float>>, Stage);
template LossResult<double> staged_loss<double>(Tape<double> &, std::span<const LossItem<double>>, Stage);

}  // namespace bfc
