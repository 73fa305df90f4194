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

#ifndef BFC__DECODER_HPP_
#define BFC__DECODER_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/forecast.hpp"
#include "bfc/model_config.hpp"
#include "bfc/nn.hpp"
#include "bfc/param_store.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace bfc
{

template <typename T>
struct DecoderOutput
{
  Var<T> targets;       // [A, K * 2], meters, offsets from the frame origin
  Var<T> logits;        // [A, K]
  Var<T> trajectories;  // [A, K * T * 2]; invalid in stage S1
};

/// Stage one regresses K target points with K independent heads and scores
/// each (actor feature, encoded target) pair. Stage two decodes the first
/// T - 1 steps from the same pair and appends the target as the last step.
class Decoder
{
public:
  /// Parameters of the trajectory completion head share this prefix.
  static constexpr const char * kCompletionPrefix = "dec.completion";

  Decoder() = default;
  Decoder(const ModelConfig & config, const std::string & name = "dec");

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;

  template <typename T>
  DecoderOutput<T> operator()(Binding<T> & p, const Var<T> & actors, Stage stage) const;

  std::size_t num_modes() const { return heads_.size(); }

private:
  std::size_t future_ = 0;
  double input_scale_ = 1.0;
  double output_scale_ = 1.0;
  std::vector<nn::Mlp> heads_;
  nn::Mlp target_encoder_;
  nn::Mlp confidence_;
  nn::Mlp completion_;
};

}  // namespace bfc

#endif  // BFC__DECODER_HPP_
