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

#ifndef BFC__SCENE_IO_HPP_
#define BFC__SCENE_IO_HPP_

#include "bfc/scene.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace bfc
{

/// Parses a scene document. Throws ParseError naming the offending field.
/// The lane graph is rebuilt from the centerlines with default options.
Scene load_scene(std::string_view json_text);

/// Serializes with round-trip double precision.
std::string save_scene(const Scene & scene);

Scene load_scene_file(const std::filesystem::path & path);
void save_scene_file(const Scene & scene, const std::filesystem::path & path);

std::string read_text_file(const std::filesystem::path & path);
void write_text_file(const std::filesystem::path & path, std::string_view text);

}  // namespace bfc

#endif  // BFC__SCENE_IO_HPP_
