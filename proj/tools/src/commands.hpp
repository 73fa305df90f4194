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

#ifndef BFC_CLI__COMMANDS_HPP_
#define BFC_CLI__COMMANDS_HPP_

#include "run_config.hpp"

#include "bfc/scene.hpp"

#include <exception>
#include <filesystem>
#include <ostream>
#include <vector>

namespace bfc::cli
{

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUserError = 1, kCheckFailed = 2, kInternalError = 3 };

/// Maps an escaped exception onto an exit code. Bad inputs (config, files,
/// manifests, missing predictions) are user errors; everything else is
/// internal.
int exit_code_for(const std::exception & e);

/// Scene files of a data directory in file-name order.
std::vector<Scene> load_scene_dir(const std::filesystem::path & dir);

/// Writes `num_scenes` synthetic scenes as scene_NNNN.json.
int gen_data(const RunConfig & config, std::ostream & out);
/// Trains from the data directory; writes the checkpoint and a JSON-lines
/// epoch log.
int train(const RunConfig & config, std::ostream & out);
/// Stage-two forecasts for every focal actor in the data directory.
int predict(const RunConfig & config, std::ostream & out);
/// Scores the prediction file against the data directory and writes the
/// report.
int eval(const RunConfig & config, std::ostream & out);
/// Fuses the prediction files listed in a manifest of
/// [{"model_id", "alpha", "prediction_file"}, ...]; relative paths resolve
/// against the manifest's directory. Writes to `paths.predictions`.
int ensemble(const RunConfig & config, const std::filesystem::path & manifest, std::ostream & out);
/// Block gradient checks; kCheckFailed if any block exceeds the tolerance.
int grad_check(const RunConfig & config, std::ostream & out);
/// Epoch and learning rate for every training epoch.
int lr_table(const RunConfig & config, std::ostream & out);

}  // namespace bfc::cli

#endif  // BFC_CLI__COMMANDS_HPP_
