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

#ifndef BFC__TENSOR_HPP_
#define BFC__TENSOR_HPP_

#include "bfc/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bfc
{

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape & shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape & shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += (i ? ", " : "") + std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major n-dimensional array. A rank-0 tensor holds one scalar.
template <typename T>
class Tensor
{
public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{})
  : shape_(std::move(shape)), data_(shape_size(shape_), fill)
  {
  }

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data))
  {
    if (shape_size(shape_) != data_.size()) {
      throw ShapeError(
        "tensor shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) +
        " values");
    }
  }

  static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }

  const Shape & shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T * raw() noexcept { return data_.data(); }
  const T * raw() const noexcept { return data_.data(); }

  T & operator[](std::size_t i) { return data_[i]; }
  const T & operator[](std::size_t i) const { return data_[i]; }

  T & operator()(std::size_t r, std::size_t c) { return data_[r * shape_.back() + c]; }
  const T & operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.back() + c]; }

  T item() const
  {
    if (data_.size() != 1) {
      throw ShapeError("item() on tensor of shape " + shape_str(shape_));
    }
    return data_[0];
  }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }

  Tensor reshaped(Shape shape) const
  {
    Tensor out(std::move(shape), data_);
    out.requires_grad_ = requires_grad_;
    return out;
  }

  template <typename U>
  Tensor<U> cast() const
  {
    std::vector<U> out(data_.begin(), data_.end());
    Tensor<U> t(shape_, std::move(out));
    t.set_requires_grad(requires_grad_);
    return t;
  }

  bool all_finite() const
  {
    for (const T v : data_) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    return true;
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor & a, const Tensor & b)
  {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

private:
  Shape shape_{0};
  std::vector<T> data_{};
  bool requires_grad_ = false;
};

}  // namespace bfc

#endif  // BFC__TENSOR_HPP_
