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

#include "bfc/encoder.hpp"

#include "bfc/errors.hpp"
#include "bfc/ops.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace bfc
{

void ModelConfig::validate() const
{
  if (feature_dim == 0) {
    throw ConfigError("feature_dim must be positive");
  }
  if (num_modes == 0) {
    throw ConfigError("num_modes must be positive");
  }
  if (history < 4) {
    throw ConfigError("history must be at least 4 for the stride-2 actor stages");
  }
  if (future < 2) {
    throw ConfigError("future must be at least 2");
  }
  if (!(tau_lane_actor > 0.0) || !(tau_boundary_actor > 0.0) || !(tau_actor_actor > 0.0)) {
    throw ConfigError("distance thresholds must be positive");
  }
  if (!(segment_len > 0.0)) {
    throw ConfigError("segment_len must be positive");
  }
  if (!(input_scale > 0.0) || !(output_scale > 0.0)) {
    throw ConfigError("input_scale and output_scale must be positive");
  }
}

SceneInputs prepare_inputs(const Scene & scene, const ModelConfig & config)
{
  SceneInputs in;
  in.frame = scene.frame.actor_id;
  const double s = config.input_scale;

  ActorInputs & a = in.actors;
  const std::size_t n_actors = scene.actors.size();
  const auto h = static_cast<std::size_t>(scene.horizon.history);
  a.steps = h;
  a.coords = Tensor<double>({n_actors, h, 2});
  a.headings = Tensor<double>({n_actors, h, 2});
  a.velocities = Tensor<double>({n_actors, h, 2});
  a.observed_steps.resize(n_actors);
  for (std::size_t i = 0; i < n_actors; ++i) {
    const ActorTrack & t = scene.actors[i];
    for (std::size_t k = 0; k < h && k < t.history.size(); ++k) {
      if (!t.observed[k]) {
        continue;
      }
      const ActorState & st = t.history[k];
      const std::size_t o = (i * h + k) * 2;
      a.coords[o] = st.position.x * s;
      a.coords[o + 1] = st.position.y * s;
      a.headings[o] = std::cos(st.heading);
      a.headings[o + 1] = std::sin(st.heading);
      a.velocities[o] = st.velocity.x * s;
      a.velocities[o + 1] = st.velocity.y * s;
      a.observed_steps[i].push_back(k);
    }
    a.positions.push_back(
      a.observed_steps[i].empty() ? Vec2{} : t.history[t.last_observed_index()].position);
    a.ids.push_back(t.id);
  }

  LaneInputs & l = in.lanes;
  l.graph = scene.lane_graph;
  const std::size_t n_nodes = l.graph.nodes.size();
  l.features = Tensor<double>({n_nodes, 5});
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const LaneNode & n = l.graph.nodes[i];
    l.features(i, 0) = n.center.x * s;
    l.features(i, 1) = n.center.y * s;
    l.features(i, 2) = n.direction.x;
    l.features(i, 3) = n.direction.y;
    l.features(i, 4) = n.length * s;
    l.centers.push_back(n.center);
  }

  BoundaryInputs & b = in.boundaries;
  BoundaryNodes nodes = build_boundary_nodes(scene, config.segment_len);
  b.features = Tensor<double>({nodes.size(), 10});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    b.features(i, 0) = nodes.centers[i].x * s;
    b.features(i, 1) = nodes.centers[i].y * s;
    b.features(i, 2) = nodes.directions[i].x;
    b.features(i, 3) = nodes.directions[i].y;
    b.features(i, 4 + static_cast<std::size_t>(nodes.markings[i])) = 1.0;
    b.features(i, 4 + kNumMarkings + static_cast<std::size_t>(nodes.sides[i])) = 1.0;
  }
  b.centers = std::move(nodes.centers);
  b.lane_matches = std::move(nodes.lane_matches);
  return in;
}

namespace
{

template <typename T>
Var<T> input(Binding<T> & p, const Tensor<double> & t)
{
  return nn::constant(p, t.template cast<T>());
}

/// Nearest-neighbour 2x upsampling of [A, Lc, D] to [A, Lf, D].
template <typename T>
Var<T> upsample(const Var<T> & coarse, std::size_t fine_len)
{
  const Shape & s = coarse.shape();
  const std::size_t a = s[0];
  const std::size_t lc = s[1];
  const std::size_t d = s[2];
  std::vector<std::size_t> rows;
  rows.reserve(a * fine_len);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t l = 0; l < fine_len; ++l) {
      rows.push_back(i * lc + std::min(l / 2, lc - 1));
    }
  }
  Var<T> flat = ops::reshape(coarse, {a * lc, d});
  return ops::reshape(ops::gather(flat, rows), {a, fine_len, d});
}

}  // namespace

ActorEncoder::ActorEncoder(const ModelConfig & config, const std::string & name)
: dim_(config.feature_dim),
  coord_branch_(name + ".coord", 2, dim_),
  heading_branch_(name + ".heading", 2, dim_),
  velocity_branch_(name + ".velocity", 2, dim_),
  trunk_{
    nn::ResBlock1d(name + ".trunk0", dim_, dim_), nn::ResBlock1d(name + ".trunk1", dim_, dim_),
    nn::ResBlock1d(name + ".trunk2", dim_, dim_)},
  lateral_{
    nn::Conv1d{name + ".lateral0", dim_, dim_, 1, 1, 0, true},
    nn::Conv1d{name + ".lateral1", dim_, dim_, 1, 1, 0, true},
    nn::Conv1d{name + ".lateral2", dim_, dim_, 1, 1, 0, true}},
  output_(name + ".output", dim_, dim_)
{
}

template <typename T>
void ActorEncoder::init(ParamStore<T> & store, Rng & rng) const
{
  coord_branch_.init(store, rng);
  heading_branch_.init(store, rng);
  velocity_branch_.init(store, rng);
  for (const auto & b : trunk_) {
    b.init(store, rng);
  }
  for (const auto & c : lateral_) {
    c.init(store, rng);
  }
  output_.init(store, rng);
}

template <typename T>
Var<T> ActorEncoder::operator()(Binding<T> & p, const ActorInputs & in) const
{
  const std::size_t n = in.count();
  if (in.steps < 4) {
    throw ShapeError("actor encoder needs at least 4 history steps, got " + std::to_string(in.steps));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (in.observed_steps[i].empty()) {
      throw EncodingError("actor '" + in.ids[i] + "' has no observed history steps");
    }
  }
  if (n == 0) {
    throw EncodingError("scene has no actors to encode");
  }

  Var<T> x = ops::add(
    ops::add(coord_branch_(p, input(p, in.coords)), heading_branch_(p, input(p, in.headings))),
    velocity_branch_(p, input(p, in.velocities)));

  // Trunk at scales 1, 2 and 4.
  std::array<Var<T>, 3> scales;
  scales[0] = trunk_[0](p, x);
  scales[1] = trunk_[1](p, ops::maxpool1d(scales[0], 2, 2));
  scales[2] = trunk_[2](p, ops::maxpool1d(scales[1], 2, 2));

  // Top-down merge back to full resolution.
  Var<T> merged = lateral_[2](p, scales[2]);
  for (std::size_t s = 2; s-- > 0;) {
    merged = ops::add(lateral_[s](p, scales[s]), upsample(merged, scales[s].shape()[1]));
  }
  Var<T> feats = output_(p, merged);  // [A, H, D]

  // Max over observed steps only; unobserved rows are zero-filled inputs and
  // must not leak into the embedding.
  const Var<T> flat = ops::reshape(feats, {n * in.steps, dim_});
  std::vector<Var<T>> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> idx;
    for (std::size_t k : in.observed_steps[i]) {
      idx.push_back(i * in.steps + k);
    }
    rows.push_back(ops::max(ops::gather(flat, idx), 0));
  }
  return ops::concat(rows, 0);
}

GatedGraphConv::GatedGraphConv(const std::string & name, std::size_t dim)
: self{name + ".self", dim, dim, false}, norm{name + ".norm", dim}
{
  static constexpr std::array<const char *, kNumAdjacency> kNames{"pre", "suc", "left", "right"};
  for (std::size_t c = 0; c < kNumAdjacency; ++c) {
    relation[c] = nn::Linear{name + ".rel." + kNames[c], dim, dim, false};
    gate[c] = nn::Linear{name + ".gate." + kNames[c], dim, 1, true};
  }
}

template <typename T>
void GatedGraphConv::init(ParamStore<T> & store, Rng & rng) const
{
  self.init(store, rng);
  for (std::size_t c = 0; c < kNumAdjacency; ++c) {
    relation[c].init(store, rng);
    gate[c].init(store, rng);
  }
  norm.init(store, rng);
}

template <typename T>
Var<T> GatedGraphConv::operator()(
  Binding<T> & p, const Var<T> & x, const LaneGraph & graph, bool gated) const
{
  const std::size_t n = x.shape().at(0);
  const std::size_t d = x.shape().at(1);
  Var<T> y = self(p, x);
  for (std::size_t c = 0; c < kNumAdjacency; ++c) {
    const auto & edges = graph.adjacency[c];
    if (edges.empty()) {
      continue;
    }
    std::vector<std::size_t> src;
    std::vector<std::size_t> dst;
    src.reserve(edges.size());
    dst.reserve(edges.size());
    for (const Edge & e : edges) {
      src.push_back(e.src);
      dst.push_back(e.dst);
    }
    // Edge (src, dst): node src receives the message of neighbour dst.
    Var<T> agg = ops::scatter_add(ops::gather(relation[c](p, x), dst), src, n);
    if (gated) {
      const Var<T> g = ops::sigmoid(gate[c](p, x));  // [N, 1]
      const Var<T> ones = nn::constant(p, Tensor<T>({1, d}, T(1)));
      agg = ops::mul(ops::matmul(g, ones), agg);
    }
    y = ops::add(y, agg);
  }
  return ops::add(norm(p, ops::relu(y)), x);
}

template <typename T>
Var<T> GatedGraphConv::gates(Binding<T> & p, const Var<T> & x) const
{
  std::vector<Var<T>> cols;
  for (std::size_t c = 0; c < kNumAdjacency; ++c) {
    cols.push_back(ops::sigmoid(gate[c](p, x)));
  }
  return ops::concat(cols, 1);
}

LaneEncoder::LaneEncoder(const ModelConfig & config, const std::string & name)
: input_(name + ".input", 5, config.feature_dim, config.feature_dim),
  input_norm_{name + ".input_norm", config.feature_dim}
{
  for (std::size_t i = 0; i < config.graph_layers; ++i) {
    layers_.emplace_back(name + ".conv" + std::to_string(i), config.feature_dim);
  }
}

template <typename T>
void LaneEncoder::init(ParamStore<T> & store, Rng & rng) const
{
  input_.init(store, rng);
  input_norm_.init(store, rng);
  for (const auto & l : layers_) {
    l.init(store, rng);
  }
}

template <typename T>
Var<T> LaneEncoder::operator()(Binding<T> & p, const LaneInputs & in) const
{
  if (in.graph.nodes.empty()) {
    throw EncodingError("lane graph is empty");
  }
  Var<T> x = input_norm_(p, input_(p, input(p, in.features)));
  for (const auto & l : layers_) {
    x = l(p, x, in.graph);
  }
  return x;
}

BoundaryEncoder::BoundaryEncoder(const ModelConfig & config, const std::string & name)
: dim_(config.feature_dim),
  mlp_(name + ".mlp", 10, config.feature_dim, config.feature_dim),
  norm_{name + ".norm", config.feature_dim}
{
}

template <typename T>
void BoundaryEncoder::init(ParamStore<T> & store, Rng & rng) const
{
  mlp_.init(store, rng);
  norm_.init(store, rng);
}

template <typename T>
Var<T> BoundaryEncoder::operator()(Binding<T> & p, const BoundaryInputs & in) const
{
  const std::size_t n = in.features.shape().at(0);
  if (n == 0) {
    return nn::constant(p, Tensor<T>({0, dim_}));
  }
  return norm_(p, mlp_(p, input(p, in.features)));
}

#define BFC_INSTANTIATE_ENCODER(T)                                                                 \
  template void ActorEncoder::init<T>(ParamStore<T> &, Rng &) const;                               \
  template Var<T> ActorEncoder::operator()<T>(Binding<T> &, const ActorInputs &) const;            \
  template void GatedGraphConv::init<T>(ParamStore<T> &, Rng &) const;                             \
  template Var<T> GatedGraphConv::operator()<T>(                                                   \
    Binding<T> &, const Var<T> &, const LaneGraph &, bool) const;                                  \
  template Var<T> GatedGraphConv::gates<T>(Binding<T> &, const Var<T> &) const;                    \
  template void LaneEncoder::init<T>(ParamStore<T> &, Rng &) const;                                \
  template Var<T> LaneEncoder::operator()<T>(Binding<T> &, const LaneInputs &) const;              \
  template void BoundaryEncoder::init<T>(ParamStore<T> &, Rng &) const;                            \
  template Var<T> BoundaryEncoder::operator()<T>(Binding<T> &, const BoundaryInputs &) const;

BFC_INSTANTIATE_ENCODER(float)
BFC_INSTANTIATE_ENCODER(double)

#undef BFC_INSTANTIATE_ENCODER

}  // namespace bfc
