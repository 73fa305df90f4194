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

#include "bfc/ensemble.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace bfc
{

std::vector<double> model_factors(std::span<const double> alphas)
{
  if (alphas.empty()) {
    throw EnsembleError("ensemble needs at least one sub-model");
  }
  const double lo = *std::min_element(alphas.begin(), alphas.end());
  std::vector<double> f;
  double z = 0.0;
  for (double a : alphas) {
    f.push_back(std::exp(-(a - lo)));
    z += f.back();
  }
  for (double & v : f) {
    v /= z;
  }
  return f;
}

std::vector<double> ensemble_weights(
  std::span<const Forecast * const> members, std::span<const double> factors)
{
  if (members.size() != factors.size()) {
    throw ContractError("ensemble_weights: one factor per sub-model required");
  }
  std::vector<double> w;
  for (std::size_t j = 0; j < members.size(); ++j) {
    for (double c : members[j]->confidences) {
      w.push_back(c * factors[j]);
    }
  }
  return w;
}

double kmeans_objective(
  std::span<const Vec2> points, std::span<const double> weights, std::span<const std::size_t> assignments,
  std::span<const Vec2> centers)
{
  double obj = 0.0;
  for (std::size_t m = 0; m < points.size(); ++m) {
    const Vec2 d = points[m] - centers[assignments[m]];
    obj += weights[m] * dot(d, d);
  }
  return obj;
}

namespace
{

double sq_dist(Vec2 a, Vec2 b)
{
  const Vec2 d = a - b;
  return dot(d, d);
}

/// Index drawn with probability proportional to `mass`; the lowest index with
/// positive mass when the draw lands on a rounding boundary.
std::size_t sample(std::span<const double> mass, Rng & rng)
{
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = mass.size();
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) {
      continue;
    }
    acc += mass[i];
    last_positive = i;
    if (u < acc) {
      return i;
    }
  }
  return last_positive;
}

std::size_t nearest(Vec2 p, std::span<const Vec2> centers)
{
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = sq_dist(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

KMeansResult weighted_kmeans(
  std::span<const Vec2> points, std::span<const double> weights, std::size_t k, std::uint64_t seed,
  std::size_t max_iterations)
{
  const std::size_t m_points = points.size();
  if (weights.size() != m_points) {
    throw ContractError("weighted_kmeans: one weight per point required");
  }
  if (k == 0) {
    throw ContractError("weighted_kmeans: k must be positive");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractError("weighted_kmeans: weights must be finite and non-negative");
    }
    total += w;
  }
  if (m_points > 0 && !(total > 0.0)) {
    throw ContractError("weighted_kmeans: weights are all zero");
  }

  KMeansResult r;
  if (m_points < k) {
    r.assignments.resize(m_points);
    std::iota(r.assignments.begin(), r.assignments.end(), std::size_t{0});
    r.centers.assign(points.begin(), points.end());
    r.centers.resize(k);
    r.empty.assign(k, true);
    std::fill_n(r.empty.begin(), m_points, false);
    r.objective.push_back(0.0);
    return r;
  }

  // Seeding.
  Rng rng(seed);
  std::vector<bool> chosen(m_points, false);
  std::vector<double> d2(m_points, std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> mass(m_points, 0.0);
    for (std::size_t i = 0; i < m_points; ++i) {
      mass[i] = chosen[i] ? 0.0 : (c == 0 ? weights[i] : weights[i] * d2[i]);
    }
    std::size_t pick;
    if (std::accumulate(mass.begin(), mass.end(), 0.0) > 0.0) {
      pick = sample(mass, rng);
    } else {
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    r.centers.push_back(points[pick]);
    for (std::size_t i = 0; i < m_points; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], points[pick]));
    }
  }
  r.empty.assign(k, false);
  r.assignments.assign(m_points, 0);
  for (std::size_t i = 0; i < m_points; ++i) {
    r.assignments[i] = nearest(points[i], r.centers);
  }
  r.objective.push_back(kmeans_objective(points, weights, r.assignments, r.centers));

  // Lloyd iterations.
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<Vec2> sum(k);
    std::vector<double> mass(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < m_points; ++i) {
      const std::size_t a = r.assignments[i];
      sum[a] = sum[a] + points[i] * weights[i];
      mass[a] += weights[i];
      ++count[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (mass[c] > 0.0) {
        r.centers[c] = sum[c] * (1.0 / mass[c]);
      }
    }
    std::vector<std::size_t> next(m_points);
    for (std::size_t i = 0; i < m_points; ++i) {
      next[i] = nearest(points[i], r.centers);
    }
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t a : next) {
      ++count[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        continue;
      }
      std::size_t far = m_points;
      double far_d = -1.0;
      for (std::size_t i = 0; i < m_points; ++i) {
        if (count[next[i]] < 2) {
          continue;  // taking a singleton's only member would just move the hole
        }
        const double d = weights[i] * sq_dist(points[i], r.centers[next[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == m_points) {
        break;
      }
      --count[next[far]];
      next[far] = c;
      count[c] = 1;
      r.centers[c] = points[far];
    }
    ++r.iterations;
    const bool stable = next == r.assignments;
    r.assignments = std::move(next);
    r.objective.push_back(kmeans_objective(points, weights, r.assignments, r.centers));
    if (stable) {
      break;
    }
  }
  return r;
}

std::vector<FusedForecast> fuse(std::span<const SubmodelPrediction> models, std::uint64_t seed, std::size_t k)
{
  if (models.empty()) {
    throw EnsembleError("ensemble needs at least one sub-model");
  }
  std::vector<double> alphas;
  std::vector<std::map<std::string, const Forecast *>> index(models.size());
  std::vector<std::string> keys;
  std::map<std::string, bool> seen;
  for (std::size_t j = 0; j < models.size(); ++j) {
    alphas.push_back(models[j].alpha);
    for (const auto & f : models[j].forecasts) {
      index[j][f.key()] = &f;
      if (!seen[f.key()]) {
        seen[f.key()] = true;
        keys.push_back(f.key());
      }
    }
  }
  std::string missing;
  for (std::size_t j = 0; j < models.size(); ++j) {
    for (const auto & key : keys) {
      if (!index[j].contains(key)) {
        missing += (missing.empty() ? "" : ", ") + std::string("(") + models[j].model_id + ", " + key + ")";
      }
    }
  }
  if (!missing.empty()) {
    throw EnsembleError("sub-models missing actors: " + missing);
  }
  const std::vector<double> factors = model_factors(alphas);

  std::vector<FusedForecast> out;
  for (const auto & key : keys) {
    std::vector<const Forecast *> members;
    for (std::size_t j = 0; j < models.size(); ++j) {
      members.push_back(index[j].at(key));
    }
    const std::vector<double> w = ensemble_weights(members, factors);
    std::vector<const std::vector<Vec2> *> trajs;
    std::vector<Vec2> ends;
    std::vector<Vec2> targets;
    const std::size_t horizon = members.front()->horizon();
    for (const Forecast * f : members) {
      for (std::size_t m = 0; m < f->num_modes(); ++m) {
        if (f->trajectories[m].size() != horizon) {
          throw EnsembleError("sub-model horizons differ for " + key);
        }
        trajs.push_back(&f->trajectories[m]);
        ends.push_back(f->trajectories[m].back());
        targets.push_back(m < f->targets.size() ? f->targets[m] : f->trajectories[m].back());
      }
    }
    const KMeansResult km = weighted_kmeans(ends, w, k, seed ^ fnv1a64(key));

    struct Cluster
    {
      std::size_t id;
      double weight = 0.0;
      std::vector<Vec2> traj;
      Vec2 target{};
      std::size_t members = 0;
    };
    std::vector<Cluster> clusters(k);
    for (std::size_t c = 0; c < k; ++c) {
      clusters[c].id = c;
      clusters[c].traj.assign(horizon, Vec2{});
    }
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      Cluster & c = clusters[km.assignments[i]];
      c.weight += w[i];
      ++c.members;
    }
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      Cluster & c = clusters[km.assignments[i]];
      // Zero-weight clusters fall back to a plain mean.
      const double share = c.weight > 0.0 ? w[i] / c.weight : 1.0 / static_cast<double>(c.members);
      for (std::size_t t = 0; t < horizon; ++t) {
        c.traj[t] = c.traj[t] + (*trajs[i])[t] * share;
      }
      c.target = c.target + targets[i] * share;
    }
    double total = 0.0;
    for (const auto & c : clusters) {
      total += c.weight;
    }
    std::vector<Cluster *> order;
    for (auto & c : clusters) {
      if (c.members > 0) {
        order.push_back(&c);
      }
    }
    std::stable_sort(order.begin(), order.end(), [](const Cluster * a, const Cluster * b) {
      return a->weight > b->weight;
    });
    FusedForecast fused;
    fused.pool_size = trajs.size();
    fused.forecast.scene_id = members.front()->scene_id;
    fused.forecast.actor_id = members.front()->actor_id;
    std::vector<std::size_t> rank(k, 0);
    for (std::size_t r = 0; r < order.size(); ++r) {
      rank[order[r]->id] = r;
      fused.forecast.trajectories.push_back(order[r]->traj);
      fused.forecast.targets.push_back(order[r]->target);
      fused.forecast.confidences.push_back(
        total > 0.0 ? order[r]->weight / total : 1.0 / static_cast<double>(order.size()));
    }
    for (std::size_t a : km.assignments) {
      fused.membership.push_back(rank[a]);
    }
    out.push_back(std::move(fused));
  }
  return out;
}

}  // namespace bfc
