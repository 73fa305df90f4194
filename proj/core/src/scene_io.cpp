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

#include "bfc/scene_io.hpp"

#include "bfc/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace bfc
{

using nlohmann::json;

namespace
{

const json & require(const json & obj, const std::string & key, const std::string & path)
{
  if (!obj.is_object()) {
    throw ParseError(path, "expected an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(path.empty() ? key : path + "." + key, "missing key");
  }
  return *it;
}

double number(const json & v, const std::string & path)
{
  if (!v.is_number()) {
    throw ParseError(path, "expected a finite number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ParseError(path, "non-finite number");
  }
  return x;
}

int integer(const json & v, const std::string & path)
{
  if (!v.is_number_integer()) {
    throw ParseError(path, "expected an integer");
  }
  return v.get<int>();
}

const std::string & string(const json & v, const std::string & path)
{
  if (!v.is_string()) {
    throw ParseError(path, "expected a string");
  }
  return v.get_ref<const std::string &>();
}

const json & array(const json & v, const std::string & path)
{
  if (!v.is_array()) {
    throw ParseError(path, "expected an array");
  }
  return v;
}

Vec2 point(const json & v, const std::string & path)
{
  array(v, path);
  if (v.size() != 2) {
    throw ParseError(path, "expected [x, y]");
  }
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

std::vector<Vec2> points(const json & v, const std::string & path)
{
  array(v, path);
  std::vector<Vec2> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(point(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ActorKind parse_kind(const std::string & s, const std::string & path)
{
  if (s == "vehicle") return ActorKind::vehicle;
  if (s == "pedestrian") return ActorKind::pedestrian;
  if (s == "cyclist") return ActorKind::cyclist;
  if (s == "other") return ActorKind::other;
  throw ParseError(path, "unknown actor kind '" + s + "'");
}

const char * kind_name(ActorKind k)
{
  switch (k) {
    case ActorKind::vehicle: return "vehicle";
    case ActorKind::pedestrian: return "pedestrian";
    case ActorKind::cyclist: return "cyclist";
    case ActorKind::other: return "other";
  }
  return "other";
}

Marking parse_marking(const std::string & s, const std::string & path)
{
  if (s == "solid") return Marking::solid;
  if (s == "dashed") return Marking::dashed;
  if (s == "double") return Marking::double_line;
  if (s == "none") return Marking::none;
  throw ParseError(path, "unknown marking '" + s + "'");
}

const char * marking_name(Marking m)
{
  switch (m) {
    case Marking::solid: return "solid";
    case Marking::dashed: return "dashed";
    case Marking::double_line: return "double";
    case Marking::none: return "none";
  }
  return "none";
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

}  // namespace

Scene load_scene(std::string_view json_text)
{
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ParseError("<document>", e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("<document>", "expected a JSON object");
  }

  Scene scene;
  if (const auto it = doc.find("scene_id"); it != doc.end()) {
    scene.id = string(*it, "scene_id");
  }
  const json & horizon = require(doc, "horizon", "");
  scene.horizon.history = integer(require(horizon, "H", "horizon"), "horizon.H");
  scene.horizon.future = integer(require(horizon, "T", "horizon.T"), "horizon.T");

  if (const auto it = doc.find("frame"); it != doc.end() && !it->is_null()) {
    scene.frame.actor_id = string(require(*it, "actor_id", "frame"), "frame.actor_id");
    scene.frame.to_world.origin = point(require(*it, "origin", "frame"), "frame.origin");
    scene.frame.to_world.heading = number(require(*it, "heading", "frame"), "frame.heading");
  }

  const json & actors = array(require(doc, "actors", ""), "actors");
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const std::string p = "actors[" + std::to_string(i) + "]";
    const json & a = actors[i];
    ActorTrack track;
    track.id = string(require(a, "id", p), p + ".id");
    track.kind = parse_kind(string(require(a, "kind", p), p + ".kind"), p + ".kind");
    const json & hist = array(require(a, "history", p), p + ".history");
    for (std::size_t t = 0; t < hist.size(); ++t) {
      const std::string hp = p + ".history[" + std::to_string(t) + "]";
      array(hist[t], hp);
      if (hist[t].size() != 5) {
        throw ParseError(hp, "expected [x, y, heading, vx, vy]");
      }
      ActorState s;
      s.position = {number(hist[t][0], hp + "[0]"), number(hist[t][1], hp + "[1]")};
      s.heading = number(hist[t][2], hp + "[2]");
      s.velocity = {number(hist[t][3], hp + "[3]"), number(hist[t][4], hp + "[4]")};
      track.history.push_back(s);
    }
    const json & obs = array(require(a, "observed", p), p + ".observed");
    for (std::size_t t = 0; t < obs.size(); ++t) {
      if (!obs[t].is_boolean()) {
        throw ParseError(p + ".observed[" + std::to_string(t) + "]", "expected a boolean");
      }
      track.observed.push_back(obs[t].get<bool>());
    }
    const json & fut = require(a, "future", p);
    if (!fut.is_null()) {
      track.future_gt = points(fut, p + ".future");
    }
    const json & focal = require(a, "focal", p);
    if (!focal.is_boolean()) {
      throw ParseError(p + ".focal", "expected a boolean");
    }
    track.is_focal = focal.get<bool>();
    scene.actors.push_back(std::move(track));
  }

  const json & lanes = array(require(doc, "lanes", ""), "lanes");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string p = "lanes[" + std::to_string(i) + "]";
    scene.lanes.push_back({string(require(lanes[i], "id", p), p + ".id"),
                           points(require(lanes[i], "centerline", p), p + ".centerline")});
  }

  const json & bounds = array(require(doc, "boundaries", ""), "boundaries");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const std::string p = "boundaries[" + std::to_string(i) + "]";
    const json & b = bounds[i];
    BoundaryPolyline poly;
    poly.points = points(require(b, "points", p), p + ".points");
    poly.marking = parse_marking(string(require(b, "marking", p), p + ".marking"), p + ".marking");
    const std::string & side = string(require(b, "side", p), p + ".side");
    if (side == "left") {
      poly.side = Side::left;
    } else if (side == "right") {
      poly.side = Side::right;
    } else {
      throw ParseError(p + ".side", "expected 'left' or 'right'");
    }
    poly.lane_id = string(require(b, "lane_id", p), p + ".lane_id");
    scene.boundaries.push_back(std::move(poly));
  }

  scene.lane_graph = build_lane_nodes(scene.lanes);
  match_boundaries(scene);
  try {
    scene.validate();
  } catch (const ContractError & e) {
    throw ParseError("<scene>", e.what());
  }
  return scene;
}

std::string save_scene(const Scene & scene)
{
  json doc = json::object();
  doc["scene_id"] = scene.id;
  doc["horizon"] = {{"H", scene.horizon.history}, {"T", scene.horizon.future}};
  if (!scene.frame.is_world()) {
    doc["frame"] = {
      {"actor_id", scene.frame.actor_id},
      {"origin", point_json(scene.frame.to_world.origin)},
      {"heading", scene.frame.to_world.heading}};
  }
  json actors = json::array();
  for (const auto & a : scene.actors) {
    json hist = json::array();
    for (const auto & s : a.history) {
      hist.push_back({s.position.x, s.position.y, s.heading, s.velocity.x, s.velocity.y});
    }
    json obs = json::array();
    for (const bool b : a.observed) {
      obs.push_back(b);
    }
    json fut = nullptr;
    if (a.future_gt) {
      fut = json::array();
      for (const auto & p : *a.future_gt) {
        fut.push_back(point_json(p));
      }
    }
    actors.push_back({{"id", a.id}, {"kind", kind_name(a.kind)}, {"history", hist},
                      {"observed", obs}, {"future", fut}, {"focal", a.is_focal}});
  }
  doc["actors"] = std::move(actors);
  json lanes = json::array();
  for (const auto & l : scene.lanes) {
    json pts = json::array();
    for (const auto & p : l.centerline) {
      pts.push_back(point_json(p));
    }
    lanes.push_back({{"id", l.id}, {"centerline", pts}});
  }
  doc["lanes"] = std::move(lanes);
  json bounds = json::array();
  for (const auto & b : scene.boundaries) {
    json pts = json::array();
    for (const auto & p : b.points) {
      pts.push_back(point_json(p));
    }
    bounds.push_back({{"points", pts}, {"marking", marking_name(b.marking)},
                      {"side", b.side == Side::left ? "left" : "right"}, {"lane_id", b.lane_id}});
  }
  doc["boundaries"] = std::move(bounds);
  return doc.dump();
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path & path, std::string_view text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

Scene load_scene_file(const std::filesystem::path & path)
{
  return load_scene(read_text_file(path));
}

void save_scene_file(const Scene & scene, const std::filesystem::path & path)
{
  write_text_file(path, save_scene(scene));
}

}  // namespace bfc
