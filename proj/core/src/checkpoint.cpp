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

#include "bfc/checkpoint.hpp"

#include "bfc/errors.hpp"
#include "bfc/scene_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>

namespace bfc
{

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

namespace
{
constexpr const char * kFormat = "bfc-checkpoint-1";
}

const CheckpointEntry & Checkpoint::entry(std::string_view name) const
{
  for (const auto & e : entries) {
    if (e.name == name) {
      return e;
    }
  }
  throw IoError("checkpoint has no entry '" + std::string(name) + "'");
}

bool Checkpoint::contains(std::string_view name) const
{
  for (const auto & e : entries) {
    if (e.name == name) {
      return true;
    }
  }
  return false;
}

std::string encode_checkpoint(const Checkpoint & ckpt)
{
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["meta"] = ckpt.meta;
  manifest["entries"] = nlohmann::json::array();
  std::string blob;
  for (const auto & e : ckpt.entries) {
    const std::size_t offset = blob.size();
    std::size_t count = 0;
    std::visit(
      [&](const auto & v) {
        count = v.size();
        const auto * bytes = reinterpret_cast<const char *>(v.data());
        blob.append(bytes, v.size() * sizeof(v[0]));
      },
      e.values);
    if (count != shape_size(e.shape)) {
      throw ShapeError("checkpoint entry '" + e.name + "' has " + std::to_string(count) + " values for shape " + shape_str(e.shape));
    }
    manifest["entries"].push_back(
      {{"name", e.name}, {"shape", e.shape}, {"dtype", e.dtype()}, {"offset", offset}, {"count", count}});
  }
  return manifest.dump() + "\n" + blob;
}

Checkpoint decode_checkpoint(std::string_view bytes)
{
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) {
    throw IoError("checkpoint: missing manifest line");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception & e) {
    throw IoError(std::string("checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", "") != kFormat) {
    throw IoError("checkpoint: unsupported format");
  }
  const std::string_view blob = bytes.substr(nl + 1);
  Checkpoint ckpt;
  try {
    ckpt.meta = manifest.at("meta").get<std::map<std::string, std::string>>();
    for (const auto & je : manifest.at("entries")) {
      CheckpointEntry e;
      e.name = je.at("name").get<std::string>();
      e.shape = je.at("shape").get<Shape>();
      const auto dtype = je.at("dtype").get<std::string>();
      const auto offset = je.at("offset").get<std::size_t>();
      const auto count = je.at("count").get<std::size_t>();
      if (count != shape_size(e.shape)) {
        throw IoError("checkpoint entry '" + e.name + "' count does not match shape");
      }
      auto read = [&](auto tag) {
        using V = decltype(tag);
        if (offset + count * sizeof(V) > blob.size()) {
          throw IoError("checkpoint entry '" + e.name + "' runs past the blob");
        }
        std::vector<V> v(count);
        std::memcpy(v.data(), blob.data() + offset, count * sizeof(V));
        e.values = std::move(v);
      };
      if (dtype == "f32") {
        read(float{});
      } else if (dtype == "f64") {
        read(double{});
      } else {
        throw IoError("checkpoint entry '" + e.name + "' has unknown dtype " + dtype);
      }
      ckpt.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception & e) {
    throw IoError(std::string("checkpoint manifest: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path)
{
  write_text_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  return decode_checkpoint(read_text_file(path));
}

}  // namespace bfc
