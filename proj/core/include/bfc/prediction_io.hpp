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

#ifndef BFC__PREDICTION_IO_HPP_
#define BFC__PREDICTION_IO_HPP_

#include "bfc/forecast.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bfc
{

/// {"config_hash": ..., "predictions": [record, ...]} where each record is
/// {"scene_id", "actor_id", "trajectories", "confidences", "targets"}.
struct PredictionFile
{
  std::string config_hash;
  std::vector<Forecast> predictions;
};

std::string save_predictions(const PredictionFile & file);
/// Also accepts a bare record or a bare array of records. Throws ParseError.
PredictionFile load_predictions(std::string_view text);

void save_predictions_file(const PredictionFile & file, const std::filesystem::path & path);
PredictionFile load_predictions_file(const std::filesystem::path & path);

}  // namespace bfc

#endif  // BFC__PREDICTION_IO_HPP_
