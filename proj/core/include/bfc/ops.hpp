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

#ifndef BFC__OPS_HPP_
#define BFC__OPS_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/tensor.hpp"

#include <cstddef>
#include <vector>

// Differentiable operations. Every op records its backward rule on the
// inputs' tape when any input requires a gradient. Broadcasting is limited
// to adding a rank-1 bias over the last axis.
namespace bfc::ops
{

/// [m, k] x [k, n] -> [m, n]
template <typename T>
Var<T> matmul(const Var<T> & a, const Var<T> & b);

/// Elementwise a + b for equal shapes, or a + bias with rank-1 `b` matching
/// the last axis of `a`.
template <typename T>
Var<T> add(const Var<T> & a, const Var<T> & b);

template <typename T>
Var<T> sub(const Var<T> & a, const Var<T> & b);

/// Elementwise product, equal shapes.
template <typename T>
Var<T> mul(const Var<T> & a, const Var<T> & b);

template <typename T>
Var<T> scale(const Var<T> & a, T factor);

template <typename T>
Var<T> concat(const std::vector<Var<T>> & parts, int axis);

template <typename T>
Var<T> relu(const Var<T> & a);

template <typename T>
Var<T> sigmoid(const Var<T> & a);

template <typename T>
Var<T> tanh(const Var<T> & a);

template <typename T>
Var<T> softmax(const Var<T> & a, int axis);

template <typename T>
Var<T> log_softmax(const Var<T> & a, int axis);

/// x: [L, Cin] or [B, L, Cin]; weight: [Cout, Cin, W]; bias: [Cout] or an
/// invalid Var. Zero padding on both ends.
template <typename T>
Var<T> conv1d(
  const Var<T> & x, const Var<T> & weight, const Var<T> & bias, std::size_t stride,
  std::size_t padding);

/// Max over windows of the length axis of [L, C] or [B, L, C]; no padding,
/// trailing partial windows dropped. Ties go to the lowest index.
template <typename T>
Var<T> maxpool1d(const Var<T> & x, std::size_t width, std::size_t stride);

/// Normalizes over `axis`, which must be the last axis, then applies the
/// optional per-feature affine (gamma, beta of shape [last dim]).
template <typename T>
Var<T> layer_norm(
  const Var<T> & x, const Var<T> & gamma, const Var<T> & beta, T eps = T(1e-5), int axis = -1);

/// Rows of `x` (axis 0) at `indices`.
template <typename T>
Var<T> gather(const Var<T> & x, const std::vector<std::size_t> & indices);

/// out[indices[e]] += x[e] along axis 0; out has `size` rows.
template <typename T>
Var<T> scatter_add(const Var<T> & x, const std::vector<std::size_t> & indices, std::size_t size);

/// Reductions keep the reduced axis with extent 1.
template <typename T>
Var<T> sum(const Var<T> & x, int axis);

template <typename T>
Var<T> mean(const Var<T> & x, int axis);

/// Ties go to the lowest index.
template <typename T>
Var<T> max(const Var<T> & x, int axis);

/// Sum of all elements as a rank-0 tensor.
template <typename T>
Var<T> sum_all(const Var<T> & x);

template <typename T>
Var<T> mean_all(const Var<T> & x);

/// [N, D] -> [N, 1] Euclidean row norms. The gradient at a zero row is zero.
template <typename T>
Var<T> l2_norm_rows(const Var<T> & x);

/// Elementwise Huber-style smooth L1 of (pred - target).
template <typename T>
Var<T> smooth_l1(const Var<T> & pred, const Var<T> & target, T beta = T(1));

template <typename T>
Var<T> reshape(const Var<T> & x, Shape shape);

/// `length` entries of `axis` starting at `start`.
template <typename T>
Var<T> slice(const Var<T> & x, int axis, std::size_t start, std::size_t length);

}  // namespace bfc::ops

#endif  // BFC__OPS_HPP_
