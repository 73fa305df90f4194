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

#ifndef BFC__ENSEMBLE_HPP_
#define BFC__ENSEMBLE_HPP_

#include "bfc/forecast.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bfc
{

/// One sub-model's forecasts with its validation brier-minFDE (alpha).
struct SubmodelPrediction
{
  std::string model_id;
  double alpha = 0.0;
  std::vector<Forecast> forecasts;
};

/// softmax(-alpha) over the sub-models.
std::vector<double> model_factors(std::span<const double> alphas);

/// W for every pooled trajectory, model-major: confidence times the owning
/// model's factor.
std::vector<double> ensemble_weights(
  std::span<const Forecast * const> members, std::span<const double> factors);

struct KMeansResult
{
  std::vector<std::size_t> assignments;  // [M]
  std::vector<Vec2> centers;             // [k]
  std::vector<bool> empty;               // [k]; only set in the degenerate M < k case
  std::size_t iterations = 0;
  /// Weighted objective after seeding and after every Lloyd iteration.
  std::vector<double> objective;
};

/// Weighted within-cluster sum of squares.
double kmeans_objective(
  std::span<const Vec2> points, std::span<const double> weights, std::span<const std::size_t> assignments,
  std::span<const Vec2> centers);

/// Weighted k-means++ seeding (first pick proportional to W, later picks to
/// W D^2) followed by Lloyd iterations with weighted centroids until the
/// assignment is stable or `max_iterations` is reached. An empty cluster is
/// re-seeded at the point with the largest weighted distance to its center.
/// With fewer points than clusters every point gets its own cluster and the
/// rest are flagged empty. Throws ContractError on negative or all-zero
/// weights.
KMeansResult weighted_kmeans(
  std::span<const Vec2> points, std::span<const double> weights, std::size_t k, std::uint64_t seed,
  std::size_t max_iterations = 100);

struct FusedForecast
{
  Forecast forecast;
  /// Output mode of every pooled trajectory, model-major.
  std::vector<std::size_t> membership;
  std::size_t pool_size = 0;
};

/// Pools every sub-model's modes per actor, clusters the endpoints and
/// returns weighted-mean trajectories with normalized cluster weights as
/// confidences, most confident first. Throws EnsembleError if a sub-model
/// lacks an actor or horizons differ.
std::vector<FusedForecast> fuse(
  std::span<const SubmodelPrediction> models, std::uint64_t seed, std::size_t k = 6);

}  // namespace bfc

#endif  // BFC__ENSEMBLE_HPP_
