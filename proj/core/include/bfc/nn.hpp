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

#ifndef BFC__NN_HPP_
#define BFC__NN_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/param_store.hpp"
#include "bfc/rng.hpp"

#include <cstddef>
#include <string>

// Small layer descriptors. A descriptor owns only names and sizes; the
// weights live in a ParamStore under "<name>.<field>".
namespace bfc::nn
{

/// y = x W (+ b), x: [N, in], W: [in, out].
struct Linear
{
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x) const;
};

struct LayerNorm
{
  std::string name;
  std::size_t dim = 0;

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x) const;
};

/// Linear -> ReLU -> Linear.
struct Mlp
{
  Linear first;
  Linear second;

  Mlp() = default;
  Mlp(const std::string & name, std::size_t in, std::size_t hidden, std::size_t out);

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x) const;
};

struct Conv1d
{
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t width = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  bool bias = true;

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x) const;
};

/// Two width-3 convolutions with layer norm, plus a 1x1 projection on the
/// shortcut when the channel count changes. Works on [L, C] or [B, L, C].
struct ResBlock1d
{
  Conv1d conv1;
  LayerNorm norm1;
  Conv1d conv2;
  LayerNorm norm2;
  bool project = false;
  Conv1d shortcut;
  LayerNorm shortcut_norm;

  ResBlock1d() = default;
  ResBlock1d(const std::string & name, std::size_t in, std::size_t out);

  template <typename T>
  void init(ParamStore<T> & store, Rng & rng) const;
  template <typename T>
  Var<T> operator()(Binding<T> & p, const Var<T> & x) const;
};

/// Constant leaf on the binding's tape.
template <typename T>
Var<T> constant(Binding<T> & p, Tensor<T> value)
{
  return p.tape().constant(std::move(value));
}

}  // namespace bfc::nn

#endif  // BFC__NN_HPP_
