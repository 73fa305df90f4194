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

#ifndef BFC_CLI__RUN_CONFIG_HPP_
#define BFC_CLI__RUN_CONFIG_HPP_

#include "bfc/model_config.hpp"
#include "bfc/scene.hpp"
#include "bfc/train.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace bfc::cli
{

enum class Precision { F32, F64 };

std::string_view precision_name(Precision p);

struct Paths
{
  std::string data_dir = "data";
  std::string checkpoint = "model.ckpt";
  std::string log = "train_log.jsonl";
  std::string predictions = "predictions.json";
  std::string report = "report.json";
};

/// Everything a command needs. Scene horizons always follow the model's
/// history and future lengths.
struct RunConfig
{
  std::uint64_t seed = 42;
  Precision precision = Precision::F32;
  int num_scenes = 8;
  SceneGenConfig scene_gen{};
  ModelConfig model{};
  TrainConfig train{};
  std::size_t ensemble_modes = 6;
  Paths paths{};

  /// Throws ConfigError.
  void validate() const;
  /// 16 hex digits over the canonical form without `paths`, so runs that
  /// only differ in where they write share a hash.
  std::string hash() const;
  std::string to_json() const;
  /// Canonical model section, stored in checkpoints to catch mismatches.
  std::string model_json() const;
};

/// Parses and validates. Unknown keys and wrong types raise ConfigError
/// naming the offending field; omitted keys keep their defaults.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path & path);

}  // namespace bfc::cli

#endif  // BFC_CLI__RUN_CONFIG_HPP_
