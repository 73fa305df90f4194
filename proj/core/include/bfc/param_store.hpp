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

#ifndef BFC__PARAM_STORE_HPP_
#define BFC__PARAM_STORE_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/errors.hpp"
#include "bfc/tensor.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bfc
{

/// Named parameter tensors in insertion order, addressable as one flat
/// vector for the optimizer.
template <typename T>
class ParamStore
{
public:
  void add(std::string name, Tensor<T> value)
  {
    if (index_.contains(name)) {
      throw ContractError("duplicate parameter name '" + name + "'");
    }
    index_.emplace(name, names_.size());
    offsets_.push_back(flat_size_);
    flat_size_ += value.size();
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
  }

  bool contains(const std::string & name) const { return index_.contains(name); }
  std::size_t count() const noexcept { return names_.size(); }
  std::size_t flat_size() const noexcept { return flat_size_; }
  const std::vector<std::string> & names() const noexcept { return names_; }

  std::size_t index_of(const std::string & name) const
  {
    const auto it = index_.find(name);
    if (it == index_.end()) {
      throw ContractError("unknown parameter '" + name + "'");
    }
    return it->second;
  }

  const Tensor<T> & get(const std::string & name) const { return values_[index_of(name)]; }
  Tensor<T> & get(const std::string & name) { return values_[index_of(name)]; }
  const Tensor<T> & at(std::size_t i) const { return values_.at(i); }
  Tensor<T> & at(std::size_t i) { return values_.at(i); }
  std::size_t offset(const std::string & name) const { return offsets_[index_of(name)]; }

  std::vector<T> flatten() const
  {
    std::vector<T> flat;
    flat.reserve(flat_size_);
    for (const auto & v : values_) {
      flat.insert(flat.end(), v.data().begin(), v.data().end());
    }
    return flat;
  }

  void unflatten(std::span<const T> flat)
  {
    if (flat.size() != flat_size_) {
      throw ShapeError("unflatten: expected " + std::to_string(flat_size_) + " values");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offsets_[i]), values_[i].size(), values_[i].raw());
    }
  }

  ParamStore zeros_like() const
  {
    ParamStore out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      out.add(names_[i], Tensor<T>(values_[i].shape()));
    }
    return out;
  }

  template <typename U>
  ParamStore<U> cast() const
  {
    ParamStore<U> out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      out.add(names_[i], values_[i].template cast<U>());
    }
    return out;
  }

  friend bool operator==(const ParamStore & a, const ParamStore & b)
  {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

private:
  std::vector<std::string> names_;
  std::vector<Tensor<T>> values_;
  std::vector<std::size_t> offsets_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t flat_size_ = 0;
};

/// Exposes a ParamStore on a tape. Leaves are created on first use, so
/// parameters a forward pass never touches stay off the tape and receive a
/// zero gradient.
template <typename T>
class Binding
{
public:
  Binding(Tape<T> & tape, const ParamStore<T> & store, bool requires_grad = true)
  : tape_(&tape), store_(&store), requires_grad_(requires_grad)
  {
  }

  Var<T> operator()(const std::string & name)
  {
    const auto it = vars_.find(name);
    if (it != vars_.end()) {
      return it->second;
    }
    Var<T> v = tape_->leaf(store_->get(name), requires_grad_);
    vars_.emplace(name, v);
    return v;
  }

  Tape<T> & tape() const { return *tape_; }
  const ParamStore<T> & store() const { return *store_; }
  bool requires_grad() const { return requires_grad_; }

  /// Gradients keyed like the store; call after Tape::backward().
  ParamStore<T> gradients() const
  {
    ParamStore<T> out = store_->zeros_like();
    for (const auto & [name, var] : vars_) {
      if (const Tensor<T> * g = tape_->grad(var)) {
        out.get(name) = *g;
      }
    }
    return out;
  }

private:
  Tape<T> * tape_;
  const ParamStore<T> * store_;
  bool requires_grad_;
  std::unordered_map<std::string, Var<T>> vars_;
};

/// Reverse sweep from `loss`; returns gradients for every bound parameter
/// (zero for parameters the loss does not depend on).
template <typename T>
ParamStore<T> backward(const Var<T> & loss, const Binding<T> & params)
{
  params.tape().backward(loss);
  return params.gradients();
}

}  // namespace bfc

#endif  // BFC__PARAM_STORE_HPP_
