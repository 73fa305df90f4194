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

#ifndef BFC__AUTODIFF_HPP_
#define BFC__AUTODIFF_HPP_

#include "bfc/errors.hpp"
#include "bfc/tensor.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <utility>

namespace bfc
{

template <typename T>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape is alive.
template <typename T>
class Var
{
public:
  Var() = default;
  Var(Tape<T> * tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape<T> & tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }

  const Tensor<T> & value() const { return tape_->value(*this); }
  const Shape & shape() const { return value().shape(); }
  bool requires_grad() const { return tape_->requires_grad(*this); }

private:
  Tape<T> * tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records forward values and backward rules in creation order, which is a
/// topological order of the graph. Single-threaded.
template <typename T>
class Tape
{
public:
  using BackwardFn = std::function<void(const Tensor<T> & grad_out)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape & operator=(const Tape &) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad)
  {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, false, {}});
    return Var<T>(this, nodes_.size() - 1);
  }

  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  /// Records an op result. `make_backward` is only invoked (and the closure
  /// only stored) when some input requires a gradient.
  template <typename MakeBackward>
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, MakeBackward && make_backward)
  {
    bool needs = false;
    for (const auto & in : inputs) {
      needs = needs || requires_grad(in);
    }
    return record_if(std::move(value), needs, std::forward<MakeBackward>(make_backward));
  }

  template <typename MakeBackward>
  Var<T> record_if(Tensor<T> value, bool needs_grad, MakeBackward && make_backward)
  {
#ifndef NDEBUG
    if (!value.all_finite()) {
      throw ContractError("non-finite value produced by a forward op");
    }
#endif
    nodes_.push_back(Node{std::move(value), {}, needs_grad, false, {}});
    const std::size_t id = nodes_.size() - 1;
    if (needs_grad) {
      nodes_[id].backward = make_backward();
    }
    return Var<T>(this, id);
  }

  const Tensor<T> & value(const Var<T> & v) const { return nodes_.at(v.id()).value; }
  bool requires_grad(const Var<T> & v) const { return nodes_.at(v.id()).requires_grad; }

  /// Zero-initialized on first access; backward rules add into it.
  Tensor<T> & grad_buffer(const Var<T> & v)
  {
    Node & n = nodes_.at(v.id());
    if (!n.has_grad) {
      n.grad = Tensor<T>(n.value.shape());
      n.has_grad = true;
    }
    return n.grad;
  }

  void accumulate(const Var<T> & v, const Tensor<T> & g)
  {
    if (!requires_grad(v)) {
      return;
    }
    Tensor<T> & buf = grad_buffer(v);
    if (buf.size() != g.size()) {
      throw ShapeError("gradient shape " + shape_str(g.shape()) + " vs value " + shape_str(buf.shape()));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      buf[i] += g[i];
    }
  }

  /// Reverse sweep from a scalar. Each node's rule runs at most once, in
  /// reverse creation order.
  void backward(const Var<T> & loss)
  {
    if (loss.value().size() != 1) {
      throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (!requires_grad(loss)) {
      return;
    }
    grad_buffer(loss)[0] += T(1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node & n = nodes_[i];
      if (n.has_grad && n.backward) {
        n.backward(n.grad);
      }
    }
  }

  /// Gradient of a node after backward(), or nullptr if nothing flowed in.
  const Tensor<T> * grad(const Var<T> & v) const
  {
    const Node & n = nodes_.at(v.id());
    return n.has_grad ? &n.grad : nullptr;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node
  {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad;
    bool has_grad;
    BackwardFn backward;
  };
  // deque keeps references to values stable while new nodes are appended.
  std::deque<Node> nodes_;
};

}  // namespace bfc

#endif  // BFC__AUTODIFF_HPP_
