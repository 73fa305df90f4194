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

#include "bfc/prediction_io.hpp"

#include "bfc/errors.hpp"
#include "bfc/scene_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace bfc
{

namespace
{

using json = nlohmann::ordered_json;

json point(Vec2 p) { return json::array({p.x, p.y}); }

double number(const json & j, const std::string & field)
{
  if (!j.is_number()) {
    throw ParseError(field, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(field, "non-finite value");
  }
  return v;
}

Vec2 parse_point(const json & j, const std::string & field)
{
  if (!j.is_array() || j.size() != 2) {
    throw ParseError(field, "expected [x, y]");
  }
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

const json & require(const json & j, const char * key, const std::string & where)
{
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where.empty() ? key : where + "." + key, "missing key");
  }
  return j.at(key);
}

std::string text(const json & j, const std::string & field)
{
  if (!j.is_string()) {
    throw ParseError(field, "expected a string");
  }
  return j.get<std::string>();
}

Forecast parse_record(const json & j, const std::string & where)
{
  Forecast f;
  f.scene_id = text(require(j, "scene_id", where), where + ".scene_id");
  f.actor_id = text(require(j, "actor_id", where), where + ".actor_id");
  const json & trajs = require(j, "trajectories", where);
  const json & confs = require(j, "confidences", where);
  const json & targets = require(j, "targets", where);
  if (!trajs.is_array() || !confs.is_array() || !targets.is_array()) {
    throw ParseError(where, "trajectories, confidences and targets must be arrays");
  }
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const std::string field = where + ".trajectories[" + std::to_string(k) + "]";
    if (!trajs[k].is_array() || trajs[k].empty()) {
      throw ParseError(field, "expected a non-empty list of points");
    }
    std::vector<Vec2> traj;
    for (std::size_t t = 0; t < trajs[k].size(); ++t) {
      traj.push_back(parse_point(trajs[k][t], field + "[" + std::to_string(t) + "]"));
    }
    f.trajectories.push_back(std::move(traj));
  }
  for (std::size_t k = 0; k < confs.size(); ++k) {
    f.confidences.push_back(number(confs[k], where + ".confidences[" + std::to_string(k) + "]"));
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    f.targets.push_back(parse_point(targets[k], where + ".targets[" + std::to_string(k) + "]"));
  }
  if (f.confidences.size() != f.trajectories.size() || f.targets.size() != f.trajectories.size()) {
    throw ParseError(where, "trajectories, confidences and targets differ in length");
  }
  return f;
}

}  // namespace

std::string save_predictions(const PredictionFile & file)
{
  json root;
  root["config_hash"] = file.config_hash;
  json list = json::array();
  for (const auto & f : file.predictions) {
    json r;
    r["scene_id"] = f.scene_id;
    r["actor_id"] = f.actor_id;
    json trajs = json::array();
    for (const auto & traj : f.trajectories) {
      json t = json::array();
      for (const Vec2 & p : traj) {
        t.push_back(point(p));
      }
      trajs.push_back(std::move(t));
    }
    r["trajectories"] = std::move(trajs);
    r["confidences"] = f.confidences;
    json targets = json::array();
    for (const Vec2 & p : f.targets) {
      targets.push_back(point(p));
    }
    r["targets"] = std::move(targets);
    list.push_back(std::move(r));
  }
  root["predictions"] = std::move(list);
  return root.dump() + "\n";
}

PredictionFile load_predictions(std::string_view text_in)
{
  json root;
  try {
    root = json::parse(text_in);
  } catch (const json::parse_error & e) {
    throw ParseError("<document>", e.what());
  }
  PredictionFile file;
  if (root.is_object() && root.contains("predictions")) {
    if (root.contains("config_hash")) {
      file.config_hash = text(root.at("config_hash"), "config_hash");
    }
    const json & list = root.at("predictions");
    if (!list.is_array()) {
      throw ParseError("predictions", "expected an array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      file.predictions.push_back(parse_record(list[i], "predictions[" + std::to_string(i) + "]"));
    }
  } else if (root.is_array()) {
    for (std::size_t i = 0; i < root.size(); ++i) {
      file.predictions.push_back(parse_record(root[i], "[" + std::to_string(i) + "]"));
    }
  } else {
    file.predictions.push_back(parse_record(root, "prediction"));
  }
  return file;
}

void save_predictions_file(const PredictionFile & file, const std::filesystem::path & path)
{
  write_text_file(path, save_predictions(file));
}

PredictionFile load_predictions_file(const std::filesystem::path & path)
{
  return load_predictions(read_text_file(path));
}

}  // namespace bfc
