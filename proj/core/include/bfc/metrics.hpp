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

#ifndef BFC__METRICS_HPP_
#define BFC__METRICS_HPP_

#include "bfc/forecast.hpp"
#include "bfc/scene.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bfc
{

/// Endpoint errors above this count as a miss.
inline constexpr double kMissThreshold = 2.0;
/// The larger evaluation set size.
inline constexpr std::size_t kEvalModes = 6;

using Trajectory = std::vector<Vec2>;

struct ModeSelection
{
  double value = 0.0;
  std::size_t best_mode = 0;
};

/// Indices of the `k_eval` most confident modes, by descending confidence
/// with ties to the lower index. Throws ContractError if k_eval is 0 or
/// exceeds the mode count.
std::vector<std::size_t> top_modes(std::span<const double> confidences, std::size_t k_eval);

double final_displacement(std::span<const Vec2> s, std::span<const Vec2> gt);
double average_displacement(std::span<const Vec2> s, std::span<const Vec2> gt);

/// Minimum final-point error over the evaluated modes; best_mode indexes the
/// full mode list. Ties go to the lower index.
ModeSelection min_fde(
  std::span<const Trajectory> modes, std::span<const double> confidences, std::span<const Vec2> gt,
  std::size_t k_eval);

/// Like min_fde with the mean over time steps of the pointwise error.
ModeSelection min_ade(
  std::span<const Trajectory> modes, std::span<const double> confidences, std::span<const Vec2> gt,
  std::size_t k_eval);

/// metric + (1 - p)^2.
double brier(double metric, double p_best);

/// Metric columns in report order.
enum class Metric : std::size_t {
  brier_min_fde6,
  min_fde6,
  min_fde1,
  brier_min_ade6,
  min_ade6,
  min_ade1,
  mr6,
  mr1,
};
inline constexpr std::size_t kNumMetrics = 8;
std::string_view metric_name(Metric m);

using MetricValues = std::array<double, kNumMetrics>;

/// All eight values for one actor; MR entries are 0 or 1.
MetricValues actor_metrics(const Forecast & f, std::span<const Vec2> gt);

/// Fraction of actors whose best endpoint over the evaluated modes is a miss.
double miss_rate(
  std::span<const Forecast> forecasts, std::span<const std::vector<Vec2>> gts, std::size_t k_eval);

struct MetricReport
{
  MetricValues values{};
  std::size_t scenes = 0;
  std::size_t actors = 0;

  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }

  /// Names of the violated report invariants; empty when all hold.
  std::vector<std::string> invariant_violations(double tol = 1e-12) const;

  std::string to_json(const std::string & config_hash = "") const;
  std::string to_table() const;
};

/// Averages the per-actor metrics over every focal actor of `scenes` that has
/// a ground-truth future. Throws EvaluationError listing missing keys or
/// mismatched horizons.
MetricReport evaluate(std::span<const Forecast> predictions, std::span<const Scene> scenes);

}  // namespace bfc

#endif  // BFC__METRICS_HPP_
