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

#include "bfc/scene.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <utility>

namespace bfc
{

std::size_t ActorTrack::last_observed_index() const
{
  for (std::size_t i = observed.size(); i-- > 0;) {
    if (observed[i]) {
      return i;
    }
  }
  throw EncodingError("actor '" + id + "' has no observed history step");
}

const ActorTrack * Scene::find_actor(std::string_view actor_id) const
{
  const auto idx = actor_index(actor_id);
  return idx ? &actors[*idx] : nullptr;
}

std::optional<std::size_t> Scene::actor_index(std::string_view actor_id) const
{
  for (std::size_t i = 0; i < actors.size(); ++i) {
    if (actors[i].id == actor_id) {
      return i;
    }
  }
  return std::nullopt;
}

void LaneGraph::validate() const
{
  const std::size_t n = nodes.size();
  for (const auto kind : kAllAdjacency) {
    for (const auto & e : edges(kind)) {
      if (e.src >= n || e.dst >= n) {
        throw ContractError("lane graph edge index out of range");
      }
      if (e.src == e.dst) {
        throw ContractError("lane graph contains a self edge");
      }
    }
  }
  std::set<Edge> left(edges(Adjacency::left).begin(), edges(Adjacency::left).end());
  std::set<Edge> right;
  for (const auto & e : edges(Adjacency::right)) {
    right.insert({e.dst, e.src});
  }
  if (left != right) {
    throw ContractError("left/right lane edges are not mirror pairs");
  }
  for (const auto & node : nodes) {
    if (std::abs(norm(node.direction) - 1.0) > 1e-6 || !(node.length > 0.0)) {
      throw ContractError("lane node has non-unit direction or non-positive length");
    }
  }
}

void Scene::validate() const
{
  if (horizon.history < 1 || horizon.future < 1) {
    throw ContractError("scene horizon must be positive");
  }
  const auto h = static_cast<std::size_t>(horizon.history);
  const auto t = static_cast<std::size_t>(horizon.future);
  bool any_focal = false;
  std::set<std::string> ids;
  for (const auto & a : actors) {
    if (!ids.insert(a.id).second) {
      throw ContractError("duplicate actor id '" + a.id + "'");
    }
    if (a.history.size() != h || a.observed.size() != h) {
      throw ContractError("actor '" + a.id + "' history length differs from H");
    }
    if (a.future_gt && a.future_gt->size() != t) {
      throw ContractError("actor '" + a.id + "' future length differs from T");
    }
    if (std::none_of(a.observed.begin(), a.observed.end(), [](bool b) { return b; })) {
      throw ContractError("actor '" + a.id + "' is never observed");
    }
    for (const auto & s : a.history) {
      if (!(s.heading > -std::numbers::pi && s.heading <= std::numbers::pi)) {
        throw ContractError("actor '" + a.id + "' heading outside (-pi, pi]");
      }
    }
    any_focal = any_focal || a.is_focal;
  }
  if (!any_focal) {
    throw ContractError("scene has no focal actor");
  }
  lane_graph.validate();
  for (const auto & b : boundaries) {
    if (b.points.size() < 2) {
      throw ContractError("boundary polyline needs at least two points");
    }
    for (const auto idx : b.matched_lane_nodes) {
      if (idx >= lane_graph.nodes.size()) {
        throw ContractError("boundary matched to a missing lane node");
      }
    }
  }
}

namespace
{

// Point at arclength `s` along the polyline; `cum` holds cumulative lengths.
Vec2 point_at(std::span<const Vec2> pts, const std::vector<double> & cum, double s)
{
  if (s <= 0.0) {
    return pts.front();
  }
  if (s >= cum.back()) {
    return pts.back();
  }
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const auto i = static_cast<std::size_t>(std::distance(cum.begin(), it));
  const double seg = cum[i] - cum[i - 1];
  const double u = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
  return pts[i - 1] + u * (pts[i] - pts[i - 1]);
}

}  // namespace

std::vector<PolylineSegment> resample_polyline(std::span<const Vec2> points, double segment_len)
{
  if (!(segment_len > 0.0)) {
    throw ContractError("segment_len must be positive");
  }
  if (points.size() < 2) {
    return {};
  }
  std::vector<double> cum(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    cum[i] = cum[i - 1] + distance(points[i - 1], points[i]);
  }
  const double total = cum.back();
  if (!(total > 0.0)) {
    return {};
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(total / segment_len)));
  const double step = total / static_cast<double>(n);
  std::vector<PolylineSegment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = step * static_cast<double>(i);
    const double b = step * static_cast<double>(i + 1);
    const Vec2 pa = point_at(points, cum, a);
    const Vec2 pb = point_at(points, cum, b);
    Vec2 dir = pb - pa;
    const double len = norm(dir);
    dir = len > 0.0 ? (1.0 / len) * dir : Vec2{1.0, 0.0};
    out.push_back({point_at(points, cum, 0.5 * (a + b)), dir, step});
  }
  return out;
}

LaneGraph build_lane_nodes(std::span<const Lane> lanes, const LaneGraphOptions & options)
{
  if (!(options.segment_len > 0.0)) {
    throw ContractError("segment_len must be positive");
  }
  LaneGraph graph;
  std::vector<std::pair<std::size_t, std::size_t>> lane_ranges;  // [begin, end) per kept lane
  for (const auto & lane : lanes) {
    const auto segments = resample_polyline(lane.centerline, options.segment_len);
    if (segments.empty()) {
      ++graph.skipped_polylines;
      continue;
    }
    const std::size_t begin = graph.nodes.size();
    for (const auto & seg : segments) {
      graph.nodes.push_back({seg.center, seg.direction, seg.length, lane.id});
    }
    const std::size_t end = graph.nodes.size();
    for (std::size_t i = begin; i + 1 < end; ++i) {
      graph.edges(Adjacency::successor).push_back({i, i + 1});
      graph.edges(Adjacency::predecessor).push_back({i + 1, i});
    }
    lane_ranges.emplace_back(begin, end);
  }

  const double max_dist = options.lateral_factor * options.lane_width;
  std::set<Edge> left;
  for (std::size_t a = 0; a < lane_ranges.size(); ++a) {
    for (std::size_t i = lane_ranges[a].first; i < lane_ranges[a].second; ++i) {
      const auto & ni = graph.nodes[i];
      for (std::size_t b = 0; b < lane_ranges.size(); ++b) {
        if (a == b) {
          continue;
        }
        std::size_t best = lane_ranges[b].first;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = lane_ranges[b].first; j < lane_ranges[b].second; ++j) {
          const double d = distance(ni.center, graph.nodes[j].center);
          if (d < best_d) {
            best_d = d;
            best = j;
          }
        }
        const auto & nj = graph.nodes[best];
        if (best_d >= max_dist ||
            std::abs(dot(ni.direction, nj.direction)) <= options.min_direction_dot) {
          continue;
        }
        if (cross(ni.direction, nj.center - ni.center) > 0.0) {
          left.insert({i, best});
        } else {
          left.insert({best, i});
        }
      }
    }
  }
  for (const auto & e : left) {
    graph.edges(Adjacency::left).push_back(e);
    graph.edges(Adjacency::right).push_back({e.dst, e.src});
  }
  return graph;
}

void match_boundaries(Scene & scene)
{
  for (auto & b : scene.boundaries) {
    b.matched_lane_nodes.clear();
    for (std::size_t i = 0; i < scene.lane_graph.nodes.size(); ++i) {
      if (scene.lane_graph.nodes[i].parent_lane == b.lane_id) {
        b.matched_lane_nodes.push_back(i);
      }
    }
  }
}

BoundaryNodes build_boundary_nodes(const Scene & scene, double segment_len)
{
  BoundaryNodes out;
  out.lane_matches.resize(scene.lane_graph.nodes.size());
  for (const auto & b : scene.boundaries) {
    for (const auto & seg : resample_polyline(b.points, segment_len)) {
      const std::size_t idx = out.centers.size();
      out.centers.push_back(seg.center);
      out.directions.push_back(seg.direction);
      out.markings.push_back(b.marking);
      out.sides.push_back(b.side);
      // Nearest matched lane node gets this boundary node.
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto lane_idx : b.matched_lane_nodes) {
        const double d = distance(seg.center, scene.lane_graph.nodes.at(lane_idx).center);
        if (d < best_d) {
          best_d = d;
          best = lane_idx;
        }
      }
      if (std::isfinite(best_d)) {
        out.lane_matches[best].push_back(idx);
      }
    }
  }
  for (auto & m : out.lane_matches) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
  }
  return out;
}

void SceneGenConfig::validate() const
{
  if (history < 2) {
    throw ConfigError("scene_gen.history must be >= 2");
  }
  if (future < 1) {
    throw ConfigError("scene_gen.future must be >= 1");
  }
  if (num_lanes < 1) {
    throw ConfigError("scene_gen.num_lanes must be >= 1");
  }
  if (num_actors < 1 || num_focal < 1 || num_focal > num_actors) {
    throw ConfigError("scene_gen needs 1 <= num_focal <= num_actors");
  }
  if (!(lane_width > 0.0) || !(dt > 0.0) || !(segment_len > 0.0)) {
    throw ConfigError("scene_gen lane_width, dt and segment_len must be positive");
  }
  if (!(speed_min >= 0.0) || speed_max < speed_min || curvature_max < curvature_min) {
    throw ConfigError("scene_gen speed/curvature ranges are inverted");
  }
  if (!(noise_sigma >= 0.0)) {
    throw ConfigError("scene_gen.noise_sigma must be >= 0");
  }
  const double travel = speed_max * dt * static_cast<double>(history + future);
  if (lane_length < travel + 2.0) {
    throw ConfigError("scene_gen.lane_length too short for the configured horizon and speed");
  }
  const double max_offset = 0.5 * lane_width * num_lanes;
  const double max_kappa = std::max(std::abs(curvature_min), std::abs(curvature_max));
  if (max_kappa * max_offset >= 0.5) {
    throw ConfigError("scene_gen curvature too tight for the lane layout");
  }
}

namespace
{

// Constant-curvature reference arc.
struct Arc
{
  Vec2 start;
  double heading0;
  double kappa;

  double heading(double s) const { return heading0 + kappa * s; }
  Vec2 normal(double s) const { return {-std::sin(heading(s)), std::cos(heading(s))}; }
  Vec2 point(double s) const
  {
    if (std::abs(kappa) < 1e-12) {
      return start + s * Vec2{std::cos(heading0), std::sin(heading0)};
    }
    return start + Vec2{
                     (std::sin(heading(s)) - std::sin(heading0)) / kappa,
                     (std::cos(heading0) - std::cos(heading(s))) / kappa};
  }
  Vec2 offset_point(double s, double lateral) const { return point(s) + lateral * normal(s); }
};

}  // namespace

Scene generate_synthetic(const SceneGenConfig & config, std::uint64_t seed)
{
  config.validate();
  Rng rng(seed);
  Scene scene;
  scene.id = "syn-" + std::to_string(seed);
  scene.horizon = {config.history, config.future};

  Arc arc{{0.0, 0.0}, 0.0, rng.uniform(config.curvature_min, config.curvature_max)};
  if (config.random_pose) {
    arc.start = {rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    arc.heading0 = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  }

  const int n_lanes = config.num_lanes;
  const double w = config.lane_width;
  auto lane_offset = [&](int lane) { return (lane - 0.5 * (n_lanes - 1)) * w; };

  const auto n_samples = static_cast<std::size_t>(std::ceil(config.lane_length)) + 1;
  const double ds = config.lane_length / static_cast<double>(n_samples - 1);
  auto sample_line = [&](double lateral) {
    std::vector<Vec2> pts(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      pts[i] = arc.offset_point(ds * static_cast<double>(i), lateral);
    }
    return pts;
  };

  for (int l = 0; l < n_lanes; ++l) {
    scene.lanes.push_back({"lane" + std::to_string(l), sample_line(lane_offset(l))});
  }
  // Lane 0 is the rightmost lane (smallest lateral offset).
  for (int l = 0; l < n_lanes; ++l) {
    const auto lane_id = "lane" + std::to_string(l);
    auto inner_marking = [&]() {
      return rng.uniform() < config.solid_inner_prob ? Marking::solid : Marking::dashed;
    };
    const Marking right_marking = l == 0 ? Marking::solid : inner_marking();
    const Marking left_marking = l == n_lanes - 1 ? Marking::solid : inner_marking();
    scene.boundaries.push_back(
      {sample_line(lane_offset(l) + 0.5 * w), left_marking, Side::left, lane_id, {}});
    scene.boundaries.push_back(
      {sample_line(lane_offset(l) - 0.5 * w), right_marking, Side::right, lane_id, {}});
  }

  const int steps = config.history + config.future;
  for (int a = 0; a < config.num_actors; ++a) {
    ActorTrack track;
    track.id = "a" + std::to_string(a);
    track.kind = ActorKind::vehicle;
    track.is_focal = a < config.num_focal;

    const int lane = static_cast<int>(rng.index(static_cast<std::uint64_t>(n_lanes)));
    const double speed = rng.uniform(config.speed_min, config.speed_max);
    const double travel = speed * config.dt * steps;
    const double s0 = rng.uniform(1.0, std::max(1.0, config.lane_length - travel - 1.0));

    int target_lane = lane;
    double change_start = 0.0;
    double change_steps = 1.0;
    if (n_lanes > 1 && rng.uniform() < config.lane_change_prob) {
      target_lane = lane == 0 ? 1 : (lane == n_lanes - 1 ? lane - 1 : lane + (rng.uniform() < 0.5 ? -1 : 1));
      change_start = rng.uniform(config.history * 0.5, config.history + config.future * 0.5);
      change_steps = rng.uniform(10.0, 25.0);
    }
    const double d0 = lane_offset(lane);
    const double d1 = lane_offset(target_lane);
    auto lateral = [&](double t) {
      const double u = std::clamp((t - change_start) / change_steps, 0.0, 1.0);
      return d0 + (d1 - d0) * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
    };
    auto lateral_rate = [&](double t) {
      const double raw = (t - change_start) / change_steps;
      if (raw <= 0.0 || raw >= 1.0 || target_lane == lane) {
        return 0.0;
      }
      return (d1 - d0) * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * raw) /
             (change_steps * config.dt);
    };

    int first_observed = 0;
    if (!track.is_focal && rng.uniform() < config.dropout_prob) {
      first_observed = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(config.history / 2)));
    }

    std::vector<Vec2> future;
    for (int t = 0; t < steps; ++t) {
      const double time = static_cast<double>(t);
      const double s = s0 + speed * config.dt * time;
      Vec2 pos = arc.offset_point(s, lateral(time));
      if (config.noise_sigma > 0.0) {
        pos = pos + Vec2{rng.normal(0.0, config.noise_sigma), rng.normal(0.0, config.noise_sigma)};
      }
      if (t < config.history) {
        const double heading = wrap_angle(arc.heading(s) + std::atan2(lateral_rate(time), speed));
        ActorState state{pos, heading, speed * Vec2{std::cos(heading), std::sin(heading)}};
        const bool seen = t >= first_observed;
        track.history.push_back(seen ? state : ActorState{});
        track.observed.push_back(seen);
      } else {
        future.push_back(pos);
      }
    }
    track.future_gt = std::move(future);
    scene.actors.push_back(std::move(track));
  }

  LaneGraphOptions opts;
  opts.segment_len = config.segment_len;
  opts.lane_width = config.lane_width;
  scene.lane_graph = build_lane_nodes(scene.lanes, opts);
  match_boundaries(scene);
  scene.validate();
  return scene;
}

Scene normalize(const Scene & scene, std::string_view actor_id)
{
  const ActorTrack * actor = scene.find_actor(actor_id);
  if (actor == nullptr) {
    throw NormalizationError("actor '" + std::string(actor_id) + "' not found in scene " + scene.id);
  }
  if (!actor->observed_at_last()) {
    throw NormalizationError("actor '" + std::string(actor_id) + "' is not observed at the last history step");
  }
  const ActorState & last = actor->history.back();
  const RigidTransform tf{last.position, last.heading};

  Scene out = scene;
  for (auto & a : out.actors) {
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      if (!a.observed[i]) {
        continue;
      }
      auto & s = a.history[i];
      s.position = tf.to_local(s.position);
      s.heading = wrap_angle(s.heading - tf.heading);
      s.velocity = tf.direction_to_local(s.velocity);
    }
    if (a.future_gt) {
      for (auto & p : *a.future_gt) {
        p = tf.to_local(p);
      }
    }
  }
  for (auto & lane : out.lanes) {
    for (auto & p : lane.centerline) {
      p = tf.to_local(p);
    }
  }
  for (auto & node : out.lane_graph.nodes) {
    node.center = tf.to_local(node.center);
    node.direction = tf.direction_to_local(node.direction);
  }
  for (auto & b : out.boundaries) {
    for (auto & p : b.points) {
      p = tf.to_local(p);
    }
  }
  out.frame.actor_id = std::string(actor_id);
  out.frame.to_world = scene.frame.to_world.compose(tf);
  return out;
}

}  // namespace bfc
