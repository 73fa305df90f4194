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

#ifndef BFC__MODEL_CONFIG_HPP_
#define BFC__MODEL_CONFIG_HPP_

#include <cstddef>

namespace bfc
{

struct ModelConfig
{
  std::size_t feature_dim = 64;  // D
  std::size_t graph_layers = 4;  // gated lane graph conv layers
  std::size_t num_modes = 6;     // K
  int history = 10;              // H
  int future = 15;               // T
  double tau_lane_actor = 10.0;
  double tau_boundary_actor = 10.0;
  double tau_actor_actor = 30.0;
  double segment_len = 2.0;
  /// Metric inputs are multiplied by this before entering the encoders.
  double input_scale = 0.1;
  /// Regression heads predict offsets in units of this many meters.
  double output_scale = 10.0;

  /// Throws ConfigError.
  void validate() const;
};

}  // namespace bfc

#endif  // BFC__MODEL_CONFIG_HPP_
