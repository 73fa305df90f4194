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

#include "run_config.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"
#include "bfc/scene_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <limits>
#include <set>
#include <type_traits>

namespace bfc::cli
{

using nlohmann::json;

namespace
{

/// Reads known keys from one JSON object and rejects the rest.
class Reader
{
public:
  Reader(const json & node, std::string path) : node_(node), path_(std::move(path))
  {
    if (!node_.is_object()) {
      throw ConfigError("'" + display() + "' must be an object");
    }
  }

  template <typename T>
  void get(const std::string & key, T & out)
  {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) {
      return;
    }
    const std::string field = join(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) {
        throw ConfigError("'" + field + "' must be a boolean");
      }
      out = it->get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) {
        throw ConfigError("'" + field + "' must be an integer");
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned()) {
          out = static_cast<T>(it->get<std::uint64_t>());
          return;
        }
        throw ConfigError("'" + field + "' must be non-negative");
      } else {
        const auto v = it->get<std::int64_t>();
        if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
          throw ConfigError("'" + field + "' is out of range");
        }
        out = static_cast<T>(v);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        throw ConfigError("'" + field + "' must be a number");
      }
      out = it->get<double>();
    } else {
      if (!it->is_string()) {
        throw ConfigError("'" + field + "' must be a string");
      }
      out = it->get<std::string>();
    }
  }

  Reader child(const std::string & key)
  {
    seen_.insert(key);
    const auto it = node_.find(key);
    return Reader(it == node_.end() ? empty() : *it, join(key));
  }

  void finish() const
  {
    for (const auto & [key, value] : node_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError("unknown key '" + join(key) + "'");
      }
    }
  }

private:
  static const json & empty()
  {
    static const json e = json::object();
    return e;
  }
  std::string join(const std::string & key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json & node_;
  std::string path_;
  std::set<std::string> seen_;
};

Precision parse_precision(const std::string & s)
{
  if (s == "f32") {
    return Precision::F32;
  }
  if (s == "f64") {
    return Precision::F64;
  }
  throw ConfigError("'precision' must be \"f32\" or \"f64\", got \"" + s + "\"");
}

json canonical(const RunConfig & c, bool with_paths)
{
  const SceneGenConfig & g = c.scene_gen;
  const ModelConfig & m = c.model;
  const TrainConfig & t = c.train;
  json j;
  j["seed"] = c.seed;
  j["precision"] = std::string(precision_name(c.precision));
  j["num_scenes"] = c.num_scenes;
  j["scene_gen"] = {
    {"num_lanes", g.num_lanes},
    {"lane_width", g.lane_width},
    {"lane_length", g.lane_length},
    {"curvature_min", g.curvature_min},
    {"curvature_max", g.curvature_max},
    {"num_actors", g.num_actors},
    {"num_focal", g.num_focal},
    {"dt", g.dt},
    {"speed_min", g.speed_min},
    {"speed_max", g.speed_max},
    {"noise_sigma", g.noise_sigma},
    {"lane_change_prob", g.lane_change_prob},
    {"dropout_prob", g.dropout_prob},
    {"solid_inner_prob", g.solid_inner_prob},
    {"random_pose", g.random_pose}};
  j["model"] = {
    {"feature_dim", m.feature_dim},
    {"graph_layers", m.graph_layers},
    {"num_modes", m.num_modes},
    {"history", m.history},
    {"future", m.future},
    {"tau_lane_actor", m.tau_lane_actor},
    {"tau_boundary_actor", m.tau_boundary_actor},
    {"tau_actor_actor", m.tau_actor_actor},
    {"segment_len", m.segment_len},
    {"input_scale", m.input_scale},
    {"output_scale", m.output_scale}};
  j["train"] = {
    {"batch_size", t.batch_size},
    {"stage2_start_epoch", t.stage2_start_epoch},
    {"lr_max", t.schedule.lr_max},
    {"lr_min", t.schedule.lr_min},
    {"first_period", t.schedule.first_period},
    {"num_periods", t.schedule.num_periods},
    {"total_epochs", t.schedule.total_epochs}};
  j["ensemble"] = {{"num_modes", c.ensemble_modes}};
  if (with_paths) {
    j["paths"] = {
      {"data_dir", c.paths.data_dir},
      {"checkpoint", c.paths.checkpoint},
      {"log", c.paths.log},
      {"predictions", c.paths.predictions},
      {"report", c.paths.report}};
  }
  return j;
}

}  // namespace

std::string_view precision_name(Precision p)
{
  return p == Precision::F32 ? "f32" : "f64";
}

void RunConfig::validate() const
{
  if (num_scenes < 1) {
    throw ConfigError("'num_scenes' must be at least 1");
  }
  if (ensemble_modes < 1) {
    throw ConfigError("'ensemble.num_modes' must be at least 1");
  }
  model.validate();
  scene_gen.validate();
  train.validate();
  if (scene_gen.history != model.history || scene_gen.future != model.future) {
    throw ConfigError("scene horizons must match the model's history and future");
  }
}

std::string RunConfig::hash() const
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical(*this, false).dump())));
  return buf;
}

std::string RunConfig::to_json() const
{
  return canonical(*this, true).dump(2) + "\n";
}

std::string RunConfig::model_json() const
{
  return canonical(*this, false)["model"].dump();
}

RunConfig parse_run_config(std::string_view json_text)
{
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(root, "");
  r.get("seed", c.seed);
  std::string precision(precision_name(c.precision));
  r.get("precision", precision);
  c.precision = parse_precision(precision);
  r.get("num_scenes", c.num_scenes);

  Reader g = r.child("scene_gen");
  g.get("num_lanes", c.scene_gen.num_lanes);
  g.get("lane_width", c.scene_gen.lane_width);
  g.get("lane_length", c.scene_gen.lane_length);
  g.get("curvature_min", c.scene_gen.curvature_min);
  g.get("curvature_max", c.scene_gen.curvature_max);
  g.get("num_actors", c.scene_gen.num_actors);
  g.get("num_focal", c.scene_gen.num_focal);
  g.get("dt", c.scene_gen.dt);
  g.get("speed_min", c.scene_gen.speed_min);
  g.get("speed_max", c.scene_gen.speed_max);
  g.get("noise_sigma", c.scene_gen.noise_sigma);
  g.get("lane_change_prob", c.scene_gen.lane_change_prob);
  g.get("dropout_prob", c.scene_gen.dropout_prob);
  g.get("solid_inner_prob", c.scene_gen.solid_inner_prob);
  g.get("random_pose", c.scene_gen.random_pose);
  g.finish();

  Reader m = r.child("model");
  m.get("feature_dim", c.model.feature_dim);
  m.get("graph_layers", c.model.graph_layers);
  m.get("num_modes", c.model.num_modes);
  m.get("history", c.model.history);
  m.get("future", c.model.future);
  m.get("tau_lane_actor", c.model.tau_lane_actor);
  m.get("tau_boundary_actor", c.model.tau_boundary_actor);
  m.get("tau_actor_actor", c.model.tau_actor_actor);
  m.get("segment_len", c.model.segment_len);
  m.get("input_scale", c.model.input_scale);
  m.get("output_scale", c.model.output_scale);
  m.finish();

  Reader t = r.child("train");
  t.get("batch_size", c.train.batch_size);
  t.get("stage2_start_epoch", c.train.stage2_start_epoch);
  t.get("lr_max", c.train.schedule.lr_max);
  t.get("lr_min", c.train.schedule.lr_min);
  t.get("first_period", c.train.schedule.first_period);
  t.get("num_periods", c.train.schedule.num_periods);
  t.get("total_epochs", c.train.schedule.total_epochs);
  t.finish();

  Reader e = r.child("ensemble");
  e.get("num_modes", c.ensemble_modes);
  e.finish();

  Reader p = r.child("paths");
  p.get("data_dir", c.paths.data_dir);
  p.get("checkpoint", c.paths.checkpoint);
  p.get("log", c.paths.log);
  p.get("predictions", c.paths.predictions);
  p.get("report", c.paths.report);
  p.finish();
  r.finish();

  c.scene_gen.history = c.model.history;
  c.scene_gen.future = c.model.future;
  c.scene_gen.segment_len = c.model.segment_len;
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path & path)
{
  return parse_run_config(read_text_file(path));
}

}  // namespace bfc::cli
