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

#include "bfc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bfc::ops
{

namespace
{

std::size_t resolve_axis(int axis, std::size_t rank, const char * op)
{
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw AxisError(
      std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

// View of a tensor as [outer, n, inner] around one axis.
struct AxisSplit
{
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape & shape, std::size_t axis)
{
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

template <typename T>
void same_tape(const Var<T> & a, const Var<T> & b, const char * op)
{
  if (&a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
}

template <typename T>
void same_shape(const Tensor<T> & a, const Tensor<T> & b, const char * op)
{
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename T, typename F, typename DF>
Var<T> unary(const Var<T> & a, F f, DF df)
{
  const Tensor<T> & x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f(x[i]);
  }
  return a.tape().record(std::move(y), {a}, [a, df]() {
    return [a, df](const Tensor<T> & g) {
      // Output value is recomputed from the input to keep the closure small.
      const Tensor<T> & x = a.value();
      Tensor<T> & gx = a.tape().grad_buffer(a);
      for (std::size_t i = 0; i < x.size(); ++i) {
        gx[i] += g[i] * df(x[i]);
      }
    };
  });
}

}  // namespace

template <typename T>
Var<T> matmul(const Var<T> & a, const Var<T> & b)
{
  same_tape(a, b, "matmul");
  const Tensor<T> & A = a.value();
  const Tensor<T> & B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) {
    throw ShapeError("matmul: shape mismatch " + shape_str(A.shape()) + " x " + shape_str(B.shape()));
  }
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor<T> C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    T * c = C.raw() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = A[i * k + p];
      const T * brow = B.raw() + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        c[j] += av * brow[j];
      }
    }
  }
  return a.tape().record(std::move(C), {a, b}, [a, b, m, k, n]() {
    return [a, b, m, k, n](const Tensor<T> & g) {
      Tape<T> & tp = a.tape();
      if (a.requires_grad()) {
        const Tensor<T> & B = b.value();
        Tensor<T> & ga = tp.grad_buffer(a);
        for (std::size_t i = 0; i < m; ++i) {
          const T * grow = g.raw() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const T * brow = B.raw() + p * n;
            T acc = 0;
            for (std::size_t j = 0; j < n; ++j) {
              acc += grow[j] * brow[j];
            }
            ga[i * k + p] += acc;
          }
        }
      }
      if (b.requires_grad()) {
        const Tensor<T> & A = a.value();
        Tensor<T> & gb = tp.grad_buffer(b);
        for (std::size_t i = 0; i < m; ++i) {
          const T * grow = g.raw() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const T av = A[i * k + p];
            T * gbrow = gb.raw() + p * n;
            for (std::size_t j = 0; j < n; ++j) {
              gbrow[j] += av * grow[j];
            }
          }
        }
      }
    };
  });
}

template <typename T>
Var<T> add(const Var<T> & a, const Var<T> & b)
{
  same_tape(a, b, "add");
  const Tensor<T> & A = a.value();
  const Tensor<T> & B = b.value();
  if (A.shape() == B.shape()) {
    Tensor<T> C(A.shape());
    for (std::size_t i = 0; i < A.size(); ++i) {
      C[i] = A[i] + B[i];
    }
    return a.tape().record(std::move(C), {a, b}, [a, b]() {
      return [a, b](const Tensor<T> & g) {
        a.tape().accumulate(a, g);
        a.tape().accumulate(b, g);
      };
    });
  }
  if (B.rank() != 1 || A.rank() == 0 || A.shape().back() != B.dim(0)) {
    throw ShapeError("add: shape mismatch " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
  }
  const std::size_t n = B.dim(0);
  Tensor<T> C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) {
    C[i] = A[i] + B[i % n];
  }
  return a.tape().record(std::move(C), {a, b}, [a, b, n]() {
    return [a, b, n](const Tensor<T> & g) {
      a.tape().accumulate(a, g);
      if (b.requires_grad()) {
        Tensor<T> & gb = a.tape().grad_buffer(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i % n] += g[i];
        }
      }
    };
  });
}

template <typename T>
Var<T> sub(const Var<T> & a, const Var<T> & b)
{
  same_tape(a, b, "sub");
  same_shape(a.value(), b.value(), "sub");
  const Tensor<T> & A = a.value();
  const Tensor<T> & B = b.value();
  Tensor<T> C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) {
    C[i] = A[i] - B[i];
  }
  return a.tape().record(std::move(C), {a, b}, [a, b]() {
    return [a, b](const Tensor<T> & g) {
      a.tape().accumulate(a, g);
      if (b.requires_grad()) {
        Tensor<T> & gb = a.tape().grad_buffer(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] -= g[i];
        }
      }
    };
  });
}

template <typename T>
Var<T> mul(const Var<T> & a, const Var<T> & b)
{
  same_tape(a, b, "mul");
  same_shape(a.value(), b.value(), "mul");
  const Tensor<T> & A = a.value();
  const Tensor<T> & B = b.value();
  Tensor<T> C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) {
    C[i] = A[i] * B[i];
  }
  return a.tape().record(std::move(C), {a, b}, [a, b]() {
    return [a, b](const Tensor<T> & g) {
      Tape<T> & tp = a.tape();
      if (a.requires_grad()) {
        const Tensor<T> & B = b.value();
        Tensor<T> & ga = tp.grad_buffer(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
      }
      if (b.requires_grad()) {
        const Tensor<T> & A = a.value();
        Tensor<T> & gb = tp.grad_buffer(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
      }
    };
  });
}

template <typename T>
Var<T> scale(const Var<T> & a, T factor)
{
  return unary<T>(a, [factor](T x) { return factor * x; }, [factor](T) { return factor; });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>> & parts, int axis)
{
  if (parts.empty()) {
    throw ContractError("concat: no inputs");
  }
  const Shape & first = parts.front().shape();
  const std::size_t ax = resolve_axis(axis, first.size(), "concat");
  Shape out_shape = first;
  out_shape[ax] = 0;
  bool needs = false;
  for (const auto & p : parts) {
    same_tape(parts.front(), p, "concat");
    const Shape & s = p.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat: rank mismatch " + shape_str(first) + " vs " + shape_str(s));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != ax && s[i] != first[i]) {
        throw ShapeError("concat: shape mismatch " + shape_str(first) + " vs " + shape_str(s));
      }
    }
    out_shape[ax] += s[ax];
    needs = needs || p.requires_grad();
  }
  const AxisSplit os = split_axis(out_shape, ax);
  Tensor<T> out(out_shape);
  std::size_t offset = 0;
  for (const auto & p : parts) {
    const Tensor<T> & v = p.value();
    const std::size_t n = v.shape()[ax];
    for (std::size_t o = 0; o < os.outer; ++o) {
      std::copy_n(v.raw() + o * n * os.inner, n * os.inner, out.raw() + (o * os.n + offset) * os.inner);
    }
    offset += n;
  }
  return parts.front().tape().record_if(std::move(out), needs, [parts, ax, os]() {
    return [parts, ax, os](const Tensor<T> & g) {
      std::size_t offset = 0;
      for (const auto & p : parts) {
        const std::size_t n = p.shape()[ax];
        if (p.requires_grad()) {
          Tensor<T> & gp = p.tape().grad_buffer(p);
          for (std::size_t o = 0; o < os.outer; ++o) {
            const T * src = g.raw() + (o * os.n + offset) * os.inner;
            T * dst = gp.raw() + o * n * os.inner;
            for (std::size_t i = 0; i < n * os.inner; ++i) dst[i] += src[i];
          }
        }
        offset += n;
      }
    };
  });
}

template <typename T>
Var<T> relu(const Var<T> & a)
{
  return unary<T>(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> sigmoid(const Var<T> & a)
{
  auto f = [](T x) {
    if (x >= T(0)) {
      return T(1) / (T(1) + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
  };
  return unary<T>(a, f, [f](T x) {
    const T y = f(x);
    return y * (T(1) - y);
  });
}

template <typename T>
Var<T> tanh(const Var<T> & a)
{
  return unary<T>(a, [](T x) { return std::tanh(x); }, [](T x) {
    const T y = std::tanh(x);
    return T(1) - y * y;
  });
}

template <typename T>
Var<T> softmax(const Var<T> & a, int axis)
{
  const Tensor<T> & x = a.value();
  const std::size_t ax = resolve_axis(axis, x.rank(), "softmax");
  const AxisSplit s = split_axis(x.shape(), ax);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * s.inner]);
      T total = 0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const T e = std::exp(x[base + j * s.inner] - mx);
        y[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.n; ++j) y[base + j * s.inner] /= total;
    }
  }
  Tensor<T> saved = y;
  return a.tape().record(std::move(y), {a}, [a, s, saved = std::move(saved)]() {
    return [a, s, saved](const Tensor<T> & g) {
      Tensor<T> & gx = a.tape().grad_buffer(a);
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          T dotp = 0;
          for (std::size_t j = 0; j < s.n; ++j) {
            dotp += g[base + j * s.inner] * saved[base + j * s.inner];
          }
          for (std::size_t j = 0; j < s.n; ++j) {
            const std::size_t idx = base + j * s.inner;
            gx[idx] += saved[idx] * (g[idx] - dotp);
          }
        }
      }
    };
  });
}

template <typename T>
Var<T> log_softmax(const Var<T> & a, int axis)
{
  const Tensor<T> & x = a.value();
  const std::size_t ax = resolve_axis(axis, x.rank(), "log_softmax");
  const AxisSplit s = split_axis(x.shape(), ax);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * s.inner]);
      T total = 0;
      for (std::size_t j = 0; j < s.n; ++j) total += std::exp(x[base + j * s.inner] - mx);
      const T lse = mx + std::log(total);
      for (std::size_t j = 0; j < s.n; ++j) y[base + j * s.inner] = x[base + j * s.inner] - lse;
    }
  }
  Tensor<T> saved = y;
  return a.tape().record(std::move(y), {a}, [a, s, saved = std::move(saved)]() {
    return [a, s, saved](const Tensor<T> & g) {
      Tensor<T> & gx = a.tape().grad_buffer(a);
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          T gsum = 0;
          for (std::size_t j = 0; j < s.n; ++j) gsum += g[base + j * s.inner];
          for (std::size_t j = 0; j < s.n; ++j) {
            const std::size_t idx = base + j * s.inner;
            gx[idx] += g[idx] - std::exp(saved[idx]) * gsum;
          }
        }
      }
    };
  });
}

template <typename T>
Var<T> conv1d(
  const Var<T> & x, const Var<T> & weight, const Var<T> & bias, std::size_t stride,
  std::size_t padding)
{
  same_tape(x, weight, "conv1d");
  const Tensor<T> & X = x.value();
  const Tensor<T> & W = weight.value();
  if (X.rank() != 2 && X.rank() != 3) {
    throw ShapeError("conv1d: input must be [L, C] or [B, L, C], got " + shape_str(X.shape()));
  }
  if (stride == 0) {
    throw ContractError("conv1d: stride must be positive");
  }
  const bool batched = X.rank() == 3;
  const std::size_t B = batched ? X.dim(0) : 1;
  const std::size_t L = X.dim(batched ? 1 : 0);
  const std::size_t cin = X.shape().back();
  if (W.rank() != 3 || W.dim(1) != cin) {
    throw ShapeError("conv1d: weight " + shape_str(W.shape()) + " incompatible with input " + shape_str(X.shape()));
  }
  const std::size_t cout = W.dim(0);
  const std::size_t kw = W.dim(2);
  if (kw == 0 || kw > L + 2 * padding) {
    throw ShapeError("conv1d: kernel width " + std::to_string(kw) + " exceeds padded length " + std::to_string(L + 2 * padding));
  }
  const bool has_bias = bias.valid();
  if (has_bias) {
    same_tape(x, bias, "conv1d");
    if (bias.value().rank() != 1 || bias.value().dim(0) != cout) {
      throw ShapeError("conv1d: bias " + shape_str(bias.shape()) + " does not match " + std::to_string(cout) + " channels");
    }
  }
  const std::size_t lout = (L + 2 * padding - kw) / stride + 1;
  Shape out_shape = batched ? Shape{B, lout, cout} : Shape{lout, cout};
  Tensor<T> Y(out_shape);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t l = 0; l < lout; ++l) {
      T * yrow = Y.raw() + (b * lout + l) * cout;
      for (std::size_t o = 0; o < cout; ++o) {
        T acc = has_bias ? bias.value()[o] : T(0);
        for (std::size_t k = 0; k < kw; ++k) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l * stride + k) - static_cast<std::ptrdiff_t>(padding);
          if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
          const T * xrow = X.raw() + (b * L + static_cast<std::size_t>(pos)) * cin;
          for (std::size_t c = 0; c < cin; ++c) {
            acc += xrow[c] * W[(o * cin + c) * kw + k];
          }
        }
        yrow[o] = acc;
      }
    }
  }
  const bool needs = x.requires_grad() || weight.requires_grad() || (has_bias && bias.requires_grad());
  return x.tape().record_if(std::move(Y), needs, [=]() {
    return [=](const Tensor<T> & g) {
      Tape<T> & tp = x.tape();
      const Tensor<T> & X = x.value();
      const Tensor<T> & W = weight.value();
      Tensor<T> * gx = x.requires_grad() ? &tp.grad_buffer(x) : nullptr;
      Tensor<T> * gw = weight.requires_grad() ? &tp.grad_buffer(weight) : nullptr;
      Tensor<T> * gb = has_bias && bias.requires_grad() ? &tp.grad_buffer(bias) : nullptr;
      for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t l = 0; l < lout; ++l) {
          const T * grow = g.raw() + (b * lout + l) * cout;
          for (std::size_t o = 0; o < cout; ++o) {
            const T go = grow[o];
            if (gb) (*gb)[o] += go;
            for (std::size_t k = 0; k < kw; ++k) {
              const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(l * stride + k) - static_cast<std::ptrdiff_t>(padding);
              if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L)) continue;
              const std::size_t xoff = (b * L + static_cast<std::size_t>(pos)) * cin;
              for (std::size_t c = 0; c < cin; ++c) {
                const std::size_t widx = (o * cin + c) * kw + k;
                if (gx) (*gx)[xoff + c] += go * W[widx];
                if (gw) (*gw)[widx] += go * X[xoff + c];
              }
            }
          }
        }
      }
    };
  });
}

template <typename T>
Var<T> maxpool1d(const Var<T> & x, std::size_t width, std::size_t stride)
{
  const Tensor<T> & X = x.value();
  if (X.rank() != 2 && X.rank() != 3) {
    throw ShapeError("maxpool1d: input must be [L, C] or [B, L, C], got " + shape_str(X.shape()));
  }
  if (width == 0 || stride == 0) {
    throw ContractError("maxpool1d: width and stride must be positive");
  }
  const bool batched = X.rank() == 3;
  const std::size_t B = batched ? X.dim(0) : 1;
  const std::size_t L = X.dim(batched ? 1 : 0);
  const std::size_t C = X.shape().back();
  if (width > L) {
    throw ShapeError("maxpool1d: width " + std::to_string(width) + " exceeds length " + std::to_string(L));
  }
  const std::size_t lout = (L - width) / stride + 1;
  Tensor<T> Y(batched ? Shape{B, lout, C} : Shape{lout, C});
  std::vector<std::size_t> argmax(Y.size());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t l = 0; l < lout; ++l) {
      for (std::size_t c = 0; c < C; ++c) {
        std::size_t best = (b * L + l * stride) * C + c;
        for (std::size_t k = 1; k < width; ++k) {
          const std::size_t idx = (b * L + l * stride + k) * C + c;
          if (X[idx] > X[best]) best = idx;
        }
        const std::size_t o = (b * lout + l) * C + c;
        Y[o] = X[best];
        argmax[o] = best;
      }
    }
  }
  return x.tape().record(std::move(Y), {x}, [x, argmax = std::move(argmax)]() {
    return [x, argmax](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
    };
  });
}

template <typename T>
Var<T> layer_norm(const Var<T> & x, const Var<T> & gamma, const Var<T> & beta, T eps, int axis)
{
  const Tensor<T> & X = x.value();
  const std::size_t ax = resolve_axis(axis, X.rank(), "layer_norm");
  if (ax + 1 != X.rank()) {
    throw AxisError("layer_norm: only the last axis is supported, got axis " + std::to_string(axis));
  }
  const std::size_t n = X.shape().back();
  const std::size_t rows = n ? X.size() / n : 0;
  for (const Var<T> * p : {&gamma, &beta}) {
    if (p->valid()) {
      same_tape(x, *p, "layer_norm");
      if (p->value().rank() != 1 || p->value().dim(0) != n) {
        throw ShapeError("layer_norm: affine " + shape_str(p->shape()) + " vs features " + std::to_string(n));
      }
    }
  }
  Tensor<T> Y(X.shape());
  Tensor<T> xhat(X.shape());
  std::vector<T> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T * xr = X.raw() + r * n;
    T mu = 0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<T>(n);
    T var = 0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(n);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (xr[j] - mu) * rstd[r];
      xhat[r * n + j] = h;
      const T gm = gamma.valid() ? gamma.value()[j] : T(1);
      const T bt = beta.valid() ? beta.value()[j] : T(0);
      Y[r * n + j] = h * gm + bt;
    }
  }
  const bool needs = x.requires_grad() || (gamma.valid() && gamma.requires_grad()) ||
                     (beta.valid() && beta.requires_grad());
  return x.tape().record_if(std::move(Y), needs, [=, xhat = std::move(xhat), rstd = std::move(rstd)]() {
    return [=](const Tensor<T> & g) {
      Tape<T> & tp = x.tape();
      Tensor<T> * gx = x.requires_grad() ? &tp.grad_buffer(x) : nullptr;
      Tensor<T> * gg = gamma.valid() && gamma.requires_grad() ? &tp.grad_buffer(gamma) : nullptr;
      Tensor<T> * gbt = beta.valid() && beta.requires_grad() ? &tp.grad_buffer(beta) : nullptr;
      std::vector<T> gh(n);
      for (std::size_t r = 0; r < rows; ++r) {
        T mean_gh = 0;
        T mean_ghx = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t i = r * n + j;
          if (gg) (*gg)[j] += g[i] * xhat[i];
          if (gbt) (*gbt)[j] += g[i];
          gh[j] = g[i] * (gamma.valid() ? gamma.value()[j] : T(1));
          mean_gh += gh[j];
          mean_ghx += gh[j] * xhat[i];
        }
        if (!gx) continue;
        mean_gh /= static_cast<T>(n);
        mean_ghx /= static_cast<T>(n);
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t i = r * n + j;
          (*gx)[i] += rstd[r] * (gh[j] - mean_gh - xhat[i] * mean_ghx);
        }
      }
    };
  });
}

template <typename T>
Var<T> gather(const Var<T> & x, const std::vector<std::size_t> & indices)
{
  const Tensor<T> & X = x.value();
  if (X.rank() == 0) {
    throw ShapeError("gather: rank-0 input");
  }
  const std::size_t rows = X.dim(0);
  const std::size_t row = rows ? X.size() / rows : 0;
  Shape out_shape = X.shape();
  out_shape[0] = indices.size();
  Tensor<T> Y(out_shape);
  for (std::size_t e = 0; e < indices.size(); ++e) {
    if (indices[e] >= rows) {
      throw ShapeError("gather: index " + std::to_string(indices[e]) + " out of range for " + shape_str(X.shape()));
    }
    std::copy_n(X.raw() + indices[e] * row, row, Y.raw() + e * row);
  }
  return x.tape().record(std::move(Y), {x}, [x, indices, row]() {
    return [x, indices, row](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t e = 0; e < indices.size(); ++e) {
        T * dst = gx.raw() + indices[e] * row;
        const T * src = g.raw() + e * row;
        for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
      }
    };
  });
}

template <typename T>
Var<T> scatter_add(const Var<T> & x, const std::vector<std::size_t> & indices, std::size_t size)
{
  const Tensor<T> & X = x.value();
  if (X.rank() == 0 || X.dim(0) != indices.size()) {
    throw ShapeError("scatter_add: " + std::to_string(indices.size()) + " indices for input " + shape_str(X.shape()));
  }
  const std::size_t row = indices.empty() ? (X.rank() > 1 ? shape_size(Shape(X.shape().begin() + 1, X.shape().end())) : 1)
                                          : X.size() / indices.size();
  Shape out_shape = X.shape();
  out_shape[0] = size;
  Tensor<T> Y(out_shape);
  for (std::size_t e = 0; e < indices.size(); ++e) {
    if (indices[e] >= size) {
      throw ShapeError("scatter_add: index " + std::to_string(indices[e]) + " out of range for size " + std::to_string(size));
    }
    T * dst = Y.raw() + indices[e] * row;
    const T * src = X.raw() + e * row;
    for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
  }
  return x.tape().record(std::move(Y), {x}, [x, indices, row]() {
    return [x, indices, row](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t e = 0; e < indices.size(); ++e) {
        const T * src = g.raw() + indices[e] * row;
        T * dst = gx.raw() + e * row;
        for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
      }
    };
  });
}

template <typename T>
Var<T> sum(const Var<T> & x, int axis)
{
  const Tensor<T> & X = x.value();
  const std::size_t ax = resolve_axis(axis, X.rank(), "sum");
  const AxisSplit s = split_axis(X.shape(), ax);
  Shape out_shape = X.shape();
  out_shape[ax] = 1;
  Tensor<T> Y(out_shape);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t j = 0; j < s.n; ++j)
      for (std::size_t in = 0; in < s.inner; ++in)
        Y[o * s.inner + in] += X[(o * s.n + j) * s.inner + in];
  return x.tape().record(std::move(Y), {x}, [x, s]() {
    return [x, s](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.n; ++j)
          for (std::size_t in = 0; in < s.inner; ++in)
            gx[(o * s.n + j) * s.inner + in] += g[o * s.inner + in];
    };
  });
}

template <typename T>
Var<T> mean(const Var<T> & x, int axis)
{
  const std::size_t ax = resolve_axis(axis, x.value().rank(), "mean");
  const std::size_t n = x.shape()[ax];
  if (n == 0) {
    throw ShapeError("mean: empty axis in " + shape_str(x.shape()));
  }
  return scale(sum(x, axis), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> max(const Var<T> & x, int axis)
{
  const Tensor<T> & X = x.value();
  const std::size_t ax = resolve_axis(axis, X.rank(), "max");
  const AxisSplit s = split_axis(X.shape(), ax);
  if (s.n == 0) {
    throw ShapeError("max: empty axis in " + shape_str(X.shape()));
  }
  Shape out_shape = X.shape();
  out_shape[ax] = 1;
  Tensor<T> Y(out_shape);
  std::vector<std::size_t> argmax(Y.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      std::size_t best = o * s.n * s.inner + in;
      for (std::size_t j = 1; j < s.n; ++j) {
        const std::size_t idx = (o * s.n + j) * s.inner + in;
        if (X[idx] > X[best]) best = idx;
      }
      Y[o * s.inner + in] = X[best];
      argmax[o * s.inner + in] = best;
    }
  }
  return x.tape().record(std::move(Y), {x}, [x, argmax = std::move(argmax)]() {
    return [x, argmax](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
    };
  });
}

template <typename T>
Var<T> sum_all(const Var<T> & x)
{
  const Tensor<T> & X = x.value();
  T total = 0;
  for (std::size_t i = 0; i < X.size(); ++i) total += X[i];
  return x.tape().record(Tensor<T>::scalar(total), {x}, [x]() {
    return [x](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      const T gv = g[0];
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gv;
    };
  });
}

template <typename T>
Var<T> mean_all(const Var<T> & x)
{
  if (x.value().size() == 0) {
    throw ShapeError("mean_all: empty tensor");
  }
  return scale(sum_all(x), T(1) / static_cast<T>(x.value().size()));
}

template <typename T>
Var<T> l2_norm_rows(const Var<T> & x)
{
  const Tensor<T> & X = x.value();
  if (X.rank() != 2) {
    throw ShapeError("l2_norm_rows: expected [N, D], got " + shape_str(X.shape()));
  }
  const std::size_t N = X.dim(0), D = X.dim(1);
  Tensor<T> Y({N, 1});
  for (std::size_t i = 0; i < N; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < D; ++j) acc += X(i, j) * X(i, j);
    Y[i] = std::sqrt(acc);
  }
  Tensor<T> saved = Y;
  return x.tape().record(std::move(Y), {x}, [x, D, saved = std::move(saved)]() {
    return [x, D, saved](const Tensor<T> & g) {
      const Tensor<T> & X = x.value();
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t i = 0; i < saved.size(); ++i) {
        if (saved[i] <= T(0)) continue;
        const T f = g[i] / saved[i];
        for (std::size_t j = 0; j < D; ++j) gx[i * D + j] += f * X[i * D + j];
      }
    };
  });
}

template <typename T>
Var<T> smooth_l1(const Var<T> & pred, const Var<T> & target, T beta)
{
  same_tape(pred, target, "smooth_l1");
  same_shape(pred.value(), target.value(), "smooth_l1");
  if (!(beta > T(0))) {
    throw ContractError("smooth_l1: beta must be positive");
  }
  const Tensor<T> & P = pred.value();
  const Tensor<T> & Q = target.value();
  Tensor<T> Y(P.shape());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const T d = P[i] - Q[i];
    const T ad = std::abs(d);
    Y[i] = ad < beta ? T(0.5) * d * d / beta : ad - T(0.5) * beta;
  }
  return pred.tape().record(std::move(Y), {pred, target}, [pred, target, beta]() {
    return [pred, target, beta](const Tensor<T> & g) {
      Tape<T> & tp = pred.tape();
      const Tensor<T> & P = pred.value();
      const Tensor<T> & Q = target.value();
      Tensor<T> * gp = pred.requires_grad() ? &tp.grad_buffer(pred) : nullptr;
      Tensor<T> * gq = target.requires_grad() ? &tp.grad_buffer(target) : nullptr;
      for (std::size_t i = 0; i < P.size(); ++i) {
        const T d = P[i] - Q[i];
        const T dd = std::abs(d) < beta ? d / beta : (d > T(0) ? T(1) : T(-1));
        if (gp) (*gp)[i] += g[i] * dd;
        if (gq) (*gq)[i] -= g[i] * dd;
      }
    };
  });
}

template <typename T>
Var<T> reshape(const Var<T> & x, Shape shape)
{
  if (shape_size(shape) != x.value().size()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  return x.tape().record(x.value().reshaped(std::move(shape)), {x}, [x]() {
    return [x](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    };
  });
}

template <typename T>
Var<T> slice(const Var<T> & x, int axis, std::size_t start, std::size_t length)
{
  const Tensor<T> & X = x.value();
  const std::size_t ax = resolve_axis(axis, X.rank(), "slice");
  const AxisSplit s = split_axis(X.shape(), ax);
  if (start + length > s.n) {
    throw ShapeError("slice: [" + std::to_string(start) + ", " + std::to_string(start + length) + ") exceeds " + shape_str(X.shape()));
  }
  Shape out_shape = X.shape();
  out_shape[ax] = length;
  Tensor<T> Y(out_shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(X.raw() + (o * s.n + start) * s.inner, length * s.inner, Y.raw() + o * length * s.inner);
  }
  return x.tape().record(std::move(Y), {x}, [x, s, start, length]() {
    return [x, s, start, length](const Tensor<T> & g) {
      Tensor<T> & gx = x.tape().grad_buffer(x);
      for (std::size_t o = 0; o < s.outer; ++o) {
        T * dst = gx.raw() + (o * s.n + start) * s.inner;
        const T * src = g.raw() + o * length * s.inner;
        for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += src[i];
      }
    };
  });
}

#define BFC_INSTANTIATE_OPS(T)                                                              \
  template Var<T> matmul(const Var<T> &, const Var<T> &);                                   \
  template Var<T> add(const Var<T> &, const Var<T> &);                                      \
  template Var<T> sub(const Var<T> &, const Var<T> &);                                      \
  template Var<T> mul(const Var<T> &, const Var<T> &);                                      \
  template Var<T> scale(const Var<T> &, T);                                                 \
  template Var<T> concat(const std::vector<Var<T>> &, int);                                 \
  template Var<T> relu(const Var<T> &);                                                     \
  template Var<T> sigmoid(const Var<T> &);                                                  \
  template Var<T> tanh(const Var<T> &);                                                     \
  template Var<T> softmax(const Var<T> &, int);                                             \
  template Var<T> log_softmax(const Var<T> &, int);                                         \
  template Var<T> conv1d(const Var<T> &, const Var<T> &, const Var<T> &, std::size_t, std::size_t); \
  template Var<T> maxpool1d(const Var<T> &, std::size_t, std::size_t);                      \
  template Var<T> layer_norm(const Var<T> &, const Var<T> &, const Var<T> &, T, int);       \
  template Var<T> gather(const Var<T> &, const std::vector<std::size_t> &);                 \
  template Var<T> scatter_add(const Var<T> &, const std::vector<std::size_t> &, std::size_t); \
  template Var<T> sum(const Var<T> &, int);                                                 \
  template Var<T> mean(const Var<T> &, int);                                                \
  template Var<T> max(const Var<T> &, int);                                                 \
  template Var<T> sum_all(const Var<T> &);                                                  \
  template Var<T> mean_all(const Var<T> &);                                                 \
  template Var<T> l2_norm_rows(const Var<T> &);                                             \
  template Var<T> smooth_l1(const Var<T> &, const Var<T> &, T);                             \
  template Var<T> reshape(const Var<T> &, Shape);                                           \
  template Var<T> slice(const Var<T> &, int, std::size_t, std::size_t);

BFC_INSTANTIATE_OPS(float)
BFC_INSTANTIATE_OPS(double)

#undef BFC_INSTANTIATE_OPS

}  // namespace bfc::ops
