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

#ifndef BFC__CHECKPOINT_HPP_
#define BFC__CHECKPOINT_HPP_

#include "bfc/param_store.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bfc
{

/// One named array in a checkpoint file.
struct CheckpointEntry
{
  std::string name;
  Shape shape;
  std::variant<std::vector<float>, std::vector<double>> values;

  std::string dtype() const { return values.index() == 0 ? "f32" : "f64"; }
};

/// File layout: a single-line JSON manifest
///   {"format": "bfc-checkpoint-1", "meta": {...},
///    "entries": [{"name", "shape", "dtype", "offset", "count"}, ...]}
/// followed by '\n' and the little-endian value blob. Offsets are in bytes
/// from the start of the blob.
struct Checkpoint
{
  std::map<std::string, std::string> meta;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry & entry(std::string_view name) const;
  bool contains(std::string_view name) const;
};

std::string encode_checkpoint(const Checkpoint & ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path);
Checkpoint load_checkpoint(const std::filesystem::path & path);

template <typename T>
void append_params(Checkpoint & ckpt, const ParamStore<T> & params, const std::string & prefix = "")
{
  for (std::size_t i = 0; i < params.count(); ++i) {
    const auto & t = params.at(i);
    ckpt.entries.push_back({prefix + params.names()[i], t.shape(),
                            std::vector<T>(t.data().begin(), t.data().end())});
  }
}

/// Fills every parameter of `params` from entries named prefix + name.
/// Values stored in the other precision are converted.
template <typename T>
void restore_params(const Checkpoint & ckpt, ParamStore<T> & params, const std::string & prefix = "")
{
  for (std::size_t i = 0; i < params.count(); ++i) {
    const auto & e = ckpt.entry(prefix + params.names()[i]);
    auto & t = params.at(i);
    if (e.shape != t.shape()) {
      throw ShapeError("checkpoint entry '" + e.name + "' has shape " + shape_str(e.shape) +
                       ", expected " + shape_str(t.shape()));
    }
    std::visit([&](const auto & v) { std::copy(v.begin(), v.end(), t.raw()); }, e.values);
  }
}

}  // namespace bfc

#endif  // BFC__CHECKPOINT_HPP_
