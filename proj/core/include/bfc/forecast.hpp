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

#ifndef BFC__FORECAST_HPP_
#define BFC__FORECAST_HPP_

#include "bfc/geometry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace bfc
{

enum class Stage { S1, S2 };

inline const char * stage_name(Stage s) { return s == Stage::S1 ? "S1" : "S2"; }

/// K trajectories with confidences for one actor, in the frame of the scene
/// it was produced from.
struct Forecast
{
  std::string scene_id;
  std::string actor_id;
  std::vector<std::vector<Vec2>> trajectories;  // [K][T]
  std::vector<double> confidences;              // [K]
  std::vector<Vec2> targets;                    // [K]

  std::size_t num_modes() const { return trajectories.size(); }
  std::size_t horizon() const { return trajectories.empty() ? 0 : trajectories.front().size(); }
  std::string key() const { return scene_id + "/" + actor_id; }

  friend bool operator==(const Forecast &, const Forecast &) = default;
};

}  // namespace bfc

#endif  // BFC__FORECAST_HPP_
