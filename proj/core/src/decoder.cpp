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

#include "bfc/decoder.hpp"

#include "bfc/ops.hpp"

namespace bfc
{

Decoder::Decoder(const ModelConfig & config, const std::string & name)
: future_(static_cast<std::size_t>(config.future)),
  input_scale_(config.input_scale),
  output_scale_(config.output_scale),
  target_encoder_(name + ".target_encoder", 2, config.feature_dim, config.feature_dim),
  confidence_(name + ".confidence", 2 * config.feature_dim, config.feature_dim, 1),
  completion_(
    std::string(kCompletionPrefix), 2 * config.feature_dim, config.feature_dim,
    (future_ - 1) * 2)
{
  for (std::size_t k = 0; k < config.num_modes; ++k) {
    heads_.emplace_back(name + ".target" + std::to_string(k), config.feature_dim, config.feature_dim, 2);
  }
}

template <typename T>
void Decoder::init(ParamStore<T> & store, Rng & rng) const
{
  for (const auto & h : heads_) {
    h.init(store, rng);
  }
  target_encoder_.init(store, rng);
  confidence_.init(store, rng);
  completion_.init(store, rng);
}

template <typename T>
DecoderOutput<T> Decoder::operator()(Binding<T> & p, const Var<T> & actors, Stage stage) const
{
  std::vector<Var<T>> targets;
  std::vector<Var<T>> logits;
  std::vector<Var<T>> trajectories;
  for (const auto & head : heads_) {
    const Var<T> g = ops::scale(head(p, actors), static_cast<T>(output_scale_));  // [A, 2]
    const Var<T> encoded = target_encoder_(p, ops::scale(g, static_cast<T>(input_scale_)));
    const Var<T> joint = ops::concat<T>({actors, encoded}, 1);
    targets.push_back(g);
    logits.push_back(confidence_(p, joint));
    if (stage == Stage::S2) {
      const Var<T> steps = ops::scale(completion_(p, joint), static_cast<T>(output_scale_));
      trajectories.push_back(ops::concat<T>({steps, g}, 1));  // [A, T * 2]
    }
  }
  DecoderOutput<T> out;
  out.targets = ops::concat(targets, 1);
  out.logits = ops::concat(logits, 1);
  if (stage == Stage::S2) {
    out.trajectories = ops::concat(trajectories, 1);
  }
  return out;
}

template void Decoder::init<float>(ParamStore<float> &, Rng &) const;
template void Decoder::init<double>(ParamStore<double> &, Rng &) const;
template DecoderOutput<float> Decoder::operator()<float>(Binding<float> &, const Var<float> &, Stage) const;
template DecoderOutput<double> Decoder::operator()<double>(Binding<double> &, const Var<double> &, Stage) const;

}  // namespace bfc
