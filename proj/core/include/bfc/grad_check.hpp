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

#ifndef BFC__GRAD_CHECK_HPP_
#define BFC__GRAD_CHECK_HPP_

#include "bfc/autodiff.hpp"
#include "bfc/param_store.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace bfc
{

struct GradCheckOptions
{
  double eps = 1e-5;
  /// Coordinates sampled per parameter tensor; tensors at most this large
  /// are checked exhaustively.
  std::size_t coords_per_param = 24;
  std::uint64_t seed = 0;
};

struct GradCheckResult
{
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// A scalar function of the bound parameters, built on the binding's tape.
using ScalarFn = std::function<Var<double>(Binding<double> &)>;

/// Compares reverse-mode gradients against central differences
///   |a - (f(x + eps) - f(x - eps)) / (2 eps)| / max(1e-8, |a| + |n|)
/// over sampled coordinates and returns the worst one. 64-bit only.
/// Throws CheckError if f is non-finite.
GradCheckResult grad_check(const ScalarFn & f, ParamStore<double> & params, const GradCheckOptions & options = {});

}  // namespace bfc

#endif  // BFC__GRAD_CHECK_HPP_
