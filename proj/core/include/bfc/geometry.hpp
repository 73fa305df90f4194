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

#ifndef BFC__GEOMETRY_HPP_
#define BFC__GEOMETRY_HPP_

#include <cmath>
#include <numbers>

namespace bfc
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 rotate(Vec2 p, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double angle)
{
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

/// Rigid 2D transform. `to_parent` maps local coordinates into the parent
/// frame; `to_local` is its inverse.
struct RigidTransform
{
  Vec2 origin{};
  double heading = 0.0;

  Vec2 to_local(Vec2 p) const { return rotate(p - origin, -heading); }
  Vec2 to_parent(Vec2 p) const { return rotate(p, heading) + origin; }
  Vec2 direction_to_local(Vec2 d) const { return rotate(d, -heading); }
  Vec2 direction_to_parent(Vec2 d) const { return rotate(d, heading); }

  /// Returns the transform equivalent to applying `inner` and then `*this`
  /// when mapping to the parent frame.
  RigidTransform compose(const RigidTransform & inner) const
  {
    return {to_parent(inner.origin), wrap_angle(heading + inner.heading)};
  }
};

}  // namespace bfc

#endif  // BFC__GEOMETRY_HPP_
