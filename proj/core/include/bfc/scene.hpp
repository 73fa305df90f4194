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

#ifndef BFC__SCENE_HPP_
#define BFC__SCENE_HPP_

#include "bfc/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bfc
{

enum class ActorKind { vehicle, pedestrian, cyclist, other };

struct ActorState
{
  Vec2 position{};
  double heading = 0.0;
  Vec2 velocity{};

  friend bool operator==(const ActorState &, const ActorState &) = default;
};

struct ActorTrack
{
  std::string id;
  ActorKind kind = ActorKind::vehicle;
  std::vector<ActorState> history;
  std::vector<bool> observed;
  std::optional<std::vector<Vec2>> future_gt;
  bool is_focal = false;

  bool observed_at_last() const { return !observed.empty() && observed.back(); }
  /// Index of the last observed history step. Throws if never observed.
  std::size_t last_observed_index() const;

  friend bool operator==(const ActorTrack &, const ActorTrack &) = default;
};

struct LaneNode
{
  Vec2 center{};
  Vec2 direction{1.0, 0.0};
  double length = 0.0;
  std::string parent_lane;

  friend bool operator==(const LaneNode &, const LaneNode &) = default;
};

enum class Adjacency : std::size_t { predecessor = 0, successor = 1, left = 2, right = 3 };
inline constexpr std::size_t kNumAdjacency = 4;
inline constexpr std::array<Adjacency, kNumAdjacency> kAllAdjacency{
  Adjacency::predecessor, Adjacency::successor, Adjacency::left, Adjacency::right};

/// Directed pair. Node `src` receives messages from node `dst` for the
/// relation the edge list belongs to, e.g. successor edge (i, j) means j
/// follows i.
struct Edge
{
  std::size_t src = 0;
  std::size_t dst = 0;

  friend auto operator<=>(const Edge &, const Edge &) = default;
};

struct LaneGraph
{
  std::vector<LaneNode> nodes;
  std::array<std::vector<Edge>, kNumAdjacency> adjacency;
  /// Number of input polylines dropped for having zero length.
  std::size_t skipped_polylines = 0;

  const std::vector<Edge> & edges(Adjacency a) const
  {
    return adjacency[static_cast<std::size_t>(a)];
  }
  std::vector<Edge> & edges(Adjacency a) { return adjacency[static_cast<std::size_t>(a)]; }

  /// Throws ContractError when indices are out of range, self-edges exist, or
  /// left/right edges are not mirror pairs.
  void validate() const;

  friend bool operator==(const LaneGraph &, const LaneGraph &) = default;
};

struct Lane
{
  std::string id;
  std::vector<Vec2> centerline;

  friend bool operator==(const Lane &, const Lane &) = default;
};

enum class Marking { solid, dashed, double_line, none };
inline constexpr std::size_t kNumMarkings = 4;
enum class Side { left, right };

struct BoundaryPolyline
{
  std::vector<Vec2> points;
  Marking marking = Marking::none;
  Side side = Side::left;
  std::string lane_id;
  /// Lane-graph nodes of `lane_id`; derived by match_boundaries().
  std::vector<std::size_t> matched_lane_nodes;

  friend bool operator==(const BoundaryPolyline &, const BoundaryPolyline &) = default;
};

struct Horizon
{
  int history = 0;  // H
  int future = 0;   // T

  friend bool operator==(const Horizon &, const Horizon &) = default;
};

/// Coordinate frame of a scene. `to_world` maps scene coordinates back to
/// the world frame; for a world-frame scene it is the identity.
struct Frame
{
  std::string actor_id;  // empty for the world frame
  RigidTransform to_world{};

  bool is_world() const { return actor_id.empty(); }
  friend bool operator==(const Frame & a, const Frame & b)
  {
    return a.actor_id == b.actor_id && a.to_world.origin == b.to_world.origin &&
           a.to_world.heading == b.to_world.heading;
  }
};

struct Scene
{
  std::string id;
  Horizon horizon{};
  std::vector<ActorTrack> actors;
  std::vector<Lane> lanes;
  LaneGraph lane_graph;
  std::vector<BoundaryPolyline> boundaries;
  Frame frame{};

  const ActorTrack * find_actor(std::string_view actor_id) const;
  std::optional<std::size_t> actor_index(std::string_view actor_id) const;

  /// Throws ContractError on any violated invariant.
  void validate() const;

  friend bool operator==(const Scene &, const Scene &) = default;
};

struct LaneGraphOptions
{
  double segment_len = 2.0;
  double lane_width = 3.5;
  /// Left/right edges need centers closer than this multiple of lane width.
  double lateral_factor = 1.2;
  /// ... and |direction dot| above this.
  double min_direction_dot = 0.8;
};

/// Resamples centerlines into nodes of roughly `segment_len` and links them
/// with successor/predecessor edges along each lane and left/right edges
/// between laterally adjacent lanes.
LaneGraph build_lane_nodes(std::span<const Lane> lanes, const LaneGraphOptions & options = {});

/// Fills BoundaryPolyline::matched_lane_nodes from each boundary's lane id.
void match_boundaries(Scene & scene);

/// One resampled piece of a polyline.
struct PolylineSegment
{
  Vec2 center{};
  Vec2 direction{1.0, 0.0};
  double length = 0.0;
};

/// Splits a polyline into equal-length pieces of roughly `segment_len`.
/// Returns an empty vector for zero-length input.
std::vector<PolylineSegment> resample_polyline(std::span<const Vec2> points, double segment_len);

/// Boundaries discretized like lane centerlines, with the lane-node matching
/// the boundary-to-lane fusion consumes.
struct BoundaryNodes
{
  std::vector<Vec2> centers;
  std::vector<Vec2> directions;
  std::vector<Marking> markings;
  std::vector<Side> sides;
  /// For every lane node, the (sorted, unique) boundary node indices matched
  /// to it.
  std::vector<std::vector<std::size_t>> lane_matches;

  std::size_t size() const { return centers.size(); }
};

BoundaryNodes build_boundary_nodes(const Scene & scene, double segment_len = 2.0);

struct SceneGenConfig
{
  int num_lanes = 2;
  double lane_width = 3.5;
  double lane_length = 120.0;
  double curvature_min = -0.01;
  double curvature_max = 0.01;
  int num_actors = 3;
  int num_focal = 1;
  int history = 10;
  int future = 15;
  double dt = 0.1;
  double speed_min = 3.0;
  double speed_max = 10.0;
  double noise_sigma = 0.05;
  double lane_change_prob = 0.3;
  /// Probability that a non-focal actor misses the first part of its history.
  double dropout_prob = 0.3;
  /// Probability that an interior boundary is solid instead of dashed.
  double solid_inner_prob = 0.2;
  bool random_pose = true;
  double segment_len = 2.0;

  /// Throws ConfigError.
  void validate() const;
};

/// Deterministic synthetic scene: parallel lanes following a constant
/// curvature reference arc, boundaries offset by half the lane width, and
/// actors driving along centerlines with optional lane changes.
Scene generate_synthetic(const SceneGenConfig & config, std::uint64_t seed);

/// Rigid transform into the frame of `actor_id` at its last history step:
/// that position becomes the origin and its heading the +x axis.
Scene normalize(const Scene & scene, std::string_view actor_id);

}  // namespace bfc

#endif  // BFC__SCENE_HPP_
