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

#include "bfc/metrics.hpp"

#include "bfc/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace bfc
{

std::vector<std::size_t> top_modes(std::span<const double> confidences, std::size_t k_eval)
{
  if (k_eval == 0 || k_eval > confidences.size()) {
    throw ContractError(
      "cannot evaluate " + std::to_string(k_eval) + " of " + std::to_string(confidences.size()) +
      " modes");
  }
  std::vector<std::size_t> idx(confidences.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return confidences[a] > confidences[b];
  });
  idx.resize(k_eval);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double final_displacement(std::span<const Vec2> s, std::span<const Vec2> gt)
{
  if (s.empty() || gt.empty()) {
    throw ContractError("final_displacement of an empty trajectory");
  }
  return distance(s.back(), gt.back());
}

double average_displacement(std::span<const Vec2> s, std::span<const Vec2> gt)
{
  if (s.size() != gt.size() || s.empty()) {
    throw ContractError(
      "average_displacement: " + std::to_string(s.size()) + " vs " + std::to_string(gt.size()) +
      " steps");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    sum += distance(s[t], gt[t]);
  }
  return sum / static_cast<double>(s.size());
}

namespace
{

template <typename ErrorFn>
ModeSelection select(
  std::span<const Trajectory> modes, std::span<const double> confidences, std::size_t k_eval,
  ErrorFn && error)
{
  if (modes.size() != confidences.size()) {
    throw ContractError("mode and confidence counts differ");
  }
  ModeSelection best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k : top_modes(confidences, k_eval)) {
    const double e = error(modes[k]);
    if (e < best.value) {
      best = {e, k};
    }
  }
  return best;
}

}  // namespace

ModeSelection min_fde(
  std::span<const Trajectory> modes, std::span<const double> confidences, std::span<const Vec2> gt,
  std::size_t k_eval)
{
  return select(modes, confidences, k_eval, [&](const Trajectory & s) { return final_displacement(s, gt); });
}

ModeSelection min_ade(
  std::span<const Trajectory> modes, std::span<const double> confidences, std::span<const Vec2> gt,
  std::size_t k_eval)
{
  return select(modes, confidences, k_eval, [&](const Trajectory & s) { return average_displacement(s, gt); });
}

double brier(double metric, double p_best) { return metric + (1.0 - p_best) * (1.0 - p_best); }

std::string_view metric_name(Metric m)
{
  static constexpr std::array<std::string_view, kNumMetrics> kNames{
    "brier-minFDE(6)", "minFDE(6)", "minFDE(1)", "brier-minADE(6)",
    "minADE(6)",       "minADE(1)", "MR(6)",     "MR(1)"};
  return kNames[static_cast<std::size_t>(m)];
}

MetricValues actor_metrics(const Forecast & f, std::span<const Vec2> gt)
{
  const auto fde6 = min_fde(f.trajectories, f.confidences, gt, kEvalModes);
  const auto fde1 = min_fde(f.trajectories, f.confidences, gt, 1);
  const auto ade6 = min_ade(f.trajectories, f.confidences, gt, kEvalModes);
  const auto ade1 = min_ade(f.trajectories, f.confidences, gt, 1);
  MetricValues v{};
  v[static_cast<std::size_t>(Metric::brier_min_fde6)] = brier(fde6.value, f.confidences[fde6.best_mode]);
  v[static_cast<std::size_t>(Metric::min_fde6)] = fde6.value;
  v[static_cast<std::size_t>(Metric::min_fde1)] = fde1.value;
  v[static_cast<std::size_t>(Metric::brier_min_ade6)] = brier(ade6.value, f.confidences[ade6.best_mode]);
  v[static_cast<std::size_t>(Metric::min_ade6)] = ade6.value;
  v[static_cast<std::size_t>(Metric::min_ade1)] = ade1.value;
  v[static_cast<std::size_t>(Metric::mr6)] = fde6.value > kMissThreshold ? 1.0 : 0.0;
  v[static_cast<std::size_t>(Metric::mr1)] = fde1.value > kMissThreshold ? 1.0 : 0.0;
  return v;
}

double miss_rate(
  std::span<const Forecast> forecasts, std::span<const std::vector<Vec2>> gts, std::size_t k_eval)
{
  if (forecasts.size() != gts.size() || forecasts.empty()) {
    throw ContractError("miss_rate needs one ground truth per forecast and at least one actor");
  }
  std::size_t misses = 0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const auto sel = min_fde(forecasts[i].trajectories, forecasts[i].confidences, gts[i], k_eval);
    misses += sel.value > kMissThreshold ? 1 : 0;
  }
  return static_cast<double>(misses) / static_cast<double>(forecasts.size());
}

std::vector<std::string> MetricReport::invariant_violations(double tol) const
{
  const auto & r = *this;
  std::vector<std::string> out;
  if (r[Metric::min_fde6] > r[Metric::min_fde1] + tol) {
    out.emplace_back("minFDE(6) <= minFDE(1)");
  }
  if (r[Metric::min_ade6] > r[Metric::min_ade1] + tol) {
    out.emplace_back("minADE(6) <= minADE(1)");
  }
  if (r[Metric::brier_min_fde6] + tol < r[Metric::min_fde6]) {
    out.emplace_back("brier-minFDE(6) >= minFDE(6)");
  }
  if (r[Metric::brier_min_ade6] + tol < r[Metric::min_ade6]) {
    out.emplace_back("brier-minADE(6) >= minADE(6)");
  }
  for (Metric m : {Metric::mr6, Metric::mr1}) {
    if (r[m] < 0.0 || r[m] > 1.0) {
      out.emplace_back(std::string(metric_name(m)) + " in [0, 1]");
    }
  }
  if (r[Metric::mr6] > r[Metric::mr1] + tol) {
    out.emplace_back("MR(6) <= MR(1)");
  }
  return out;
}

std::string MetricReport::to_json(const std::string & config_hash) const
{
  nlohmann::ordered_json j;
  nlohmann::ordered_json m;
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    m[std::string(metric_name(static_cast<Metric>(i)))] = values[i];
  }
  j["metrics"] = m;
  j["scenes"] = scenes;
  j["actors"] = actors;
  if (!config_hash.empty()) {
    j["config_hash"] = config_hash;
  }
  return j.dump(2);
}

std::string MetricReport::to_table() const
{
  std::string header;
  std::string row;
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    const std::string name(metric_name(static_cast<Metric>(i)));
    char cell[64];
    std::snprintf(cell, sizeof(cell), "%.4f", values[i]);
    const std::size_t w = std::max(name.size(), std::string(cell).size());
    const auto pad = [&](const std::string & s) { return std::string(w - s.size(), ' ') + s; };
    header += (i ? "  " : "") + pad(name);
    row += (i ? "  " : "") + pad(cell);
  }
  return header + "\n" + row + "\n";
}

MetricReport evaluate(std::span<const Forecast> predictions, std::span<const Scene> scenes)
{
  std::map<std::string, const Forecast *> by_key;
  for (const auto & f : predictions) {
    by_key[f.key()] = &f;
  }
  MetricReport report;
  std::vector<std::string> missing;
  std::set<std::string> scene_ids;
  MetricValues sum{};
  for (const Scene & scene : scenes) {
    for (const ActorTrack & a : scene.actors) {
      if (!a.is_focal || !a.future_gt) {
        continue;
      }
      const std::string key = scene.id + "/" + a.id;
      const auto it = by_key.find(key);
      if (it == by_key.end()) {
        missing.push_back(key);
        continue;
      }
      const Forecast & f = *it->second;
      for (const auto & traj : f.trajectories) {
        if (traj.size() != a.future_gt->size()) {
          throw EvaluationError(
            "prediction " + key + " has " + std::to_string(traj.size()) +
            " steps, ground truth has " + std::to_string(a.future_gt->size()));
        }
      }
      const MetricValues v = actor_metrics(f, *a.future_gt);
      for (std::size_t i = 0; i < kNumMetrics; ++i) {
        sum[i] += v[i];
      }
      ++report.actors;
      scene_ids.insert(scene.id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto & k : missing) {
      list += (list.empty() ? "" : ", ") + k;
    }
    throw EvaluationError("missing predictions for: " + list);
  }
  if (report.actors == 0) {
    throw EvaluationError("no focal actor with a ground-truth future to evaluate");
  }
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    report.values[i] = sum[i] / static_cast<double>(report.actors);
  }
  report.scenes = scene_ids.size();
  return report;
}

}  // namespace bfc
