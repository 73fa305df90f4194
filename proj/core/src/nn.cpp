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

#include "bfc/nn.hpp"

#include "bfc/ops.hpp"

#include <cmath>

namespace bfc::nn
{

namespace
{

template <typename T>
Tensor<T> uniform_tensor(Shape shape, double bound, Rng & rng)
{
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(rng.uniform(-bound, bound));
  }
  return t;
}

}  // namespace

template <typename T>
void Linear::init(ParamStore<T> & store, Rng & rng) const
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  store.add(name + ".w", uniform_tensor<T>({in, out}, bound, rng));
  if (bias) {
    store.add(name + ".b", uniform_tensor<T>({out}, bound, rng));
  }
}

template <typename T>
Var<T> Linear::operator()(Binding<T> & p, const Var<T> & x) const
{
  Var<T> y = ops::matmul(x, p(name + ".w"));
  return bias ? ops::add(y, p(name + ".b")) : y;
}

template <typename T>
void LayerNorm::init(ParamStore<T> & store, Rng &) const
{
  store.add(name + ".gamma", Tensor<T>({dim}, T(1)));
  store.add(name + ".beta", Tensor<T>({dim}, T(0)));
}

template <typename T>
Var<T> LayerNorm::operator()(Binding<T> & p, const Var<T> & x) const
{
  return ops::layer_norm(x, p(name + ".gamma"), p(name + ".beta"));
}

Mlp::Mlp(const std::string & name, std::size_t in, std::size_t hidden, std::size_t out)
: first{name + ".fc1", in, hidden, true}, second{name + ".fc2", hidden, out, true}
{
}

template <typename T>
void Mlp::init(ParamStore<T> & store, Rng & rng) const
{
  first.init(store, rng);
  second.init(store, rng);
}

template <typename T>
Var<T> Mlp::operator()(Binding<T> & p, const Var<T> & x) const
{
  return second(p, ops::relu(first(p, x)));
}

template <typename T>
void Conv1d::init(ParamStore<T> & store, Rng & rng) const
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * width));
  store.add(name + ".w", uniform_tensor<T>({out, in, width}, bound, rng));
  if (bias) {
    store.add(name + ".b", uniform_tensor<T>({out}, bound, rng));
  }
}

template <typename T>
Var<T> Conv1d::operator()(Binding<T> & p, const Var<T> & x) const
{
  return ops::conv1d(x, p(name + ".w"), bias ? p(name + ".b") : Var<T>{}, stride, padding);
}

ResBlock1d::ResBlock1d(const std::string & name, std::size_t in, std::size_t out)
: conv1{name + ".conv1", in, out, 3, 1, 1, false},
  norm1{name + ".norm1", out},
  conv2{name + ".conv2", out, out, 3, 1, 1, false},
  norm2{name + ".norm2", out},
  project(in != out),
  shortcut{name + ".shortcut", in, out, 1, 1, 0, false},
  shortcut_norm{name + ".shortcut_norm", out}
{
}

template <typename T>
void ResBlock1d::init(ParamStore<T> & store, Rng & rng) const
{
  conv1.init(store, rng);
  norm1.init(store, rng);
  conv2.init(store, rng);
  norm2.init(store, rng);
  if (project) {
    shortcut.init(store, rng);
    shortcut_norm.init(store, rng);
  }
}

template <typename T>
Var<T> ResBlock1d::operator()(Binding<T> & p, const Var<T> & x) const
{
  Var<T> h = ops::relu(norm1(p, conv1(p, x)));
  h = norm2(p, conv2(p, h));
  const Var<T> skip = project ? shortcut_norm(p, shortcut(p, x)) : x;
  return ops::relu(ops::add(h, skip));
}

#define BFC_INSTANTIATE_NN(T)                                                    \
  template void Linear::init<T>(ParamStore<T> &, Rng &) const;                   \
  template Var<T> Linear::operator()<T>(Binding<T> &, const Var<T> &) const;     \
  template void LayerNorm::init<T>(ParamStore<T> &, Rng &) const;                \
  template Var<T> LayerNorm::operator()<T>(Binding<T> &, const Var<T> &) const;  \
  template void Mlp::init<T>(ParamStore<T> &, Rng &) const;                      \
  template Var<T> Mlp::operator()<T>(Binding<T> &, const Var<T> &) const;        \
  template void Conv1d::init<T>(ParamStore<T> &, Rng &) const;                   \
  template Var<T> Conv1d::operator()<T>(Binding<T> &, const Var<T> &) const;     \
  template void ResBlock1d::init<T>(ParamStore<T> &, Rng &) const;               \
  template Var<T> ResBlock1d::operator()<T>(Binding<T> &, const Var<T> &) const;

BFC_INSTANTIATE_NN(float)
BFC_INSTANTIATE_NN(double)

#undef BFC_INSTANTIATE_NN

}  // namespace bfc::nn
