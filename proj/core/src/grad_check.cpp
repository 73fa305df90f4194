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

#include "bfc/grad_check.hpp"

#include "bfc/errors.hpp"
#include "bfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bfc
{

namespace
{

/// Runs f, reporting non-finite forward values as check failures.
Var<double> call(const ScalarFn & f, Binding<double> & bound)
{
  try {
    return f(bound);
  } catch (const ContractError & e) {
    throw CheckError(std::string("grad_check: ") + e.what());
  }
}

double evaluate(const ScalarFn & f, const ParamStore<double> & params)
{
  Tape<double> tape;
  Binding<double> bound(tape, params, false);
  const double v = call(f, bound).value().item();
  if (!std::isfinite(v)) {
    throw CheckError("grad_check: function value is not finite");
  }
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn & f, ParamStore<double> & params, const GradCheckOptions & options)
{
  ParamStore<double> analytic;
  {
    Tape<double> tape;
    Binding<double> bound(tape, params, true);
    const Var<double> loss = call(f, bound);
    if (!std::isfinite(loss.value().item())) {
      throw CheckError("grad_check: function value is not finite");
    }
    analytic = backward(loss, bound);
  }

  Rng rng(options.seed);
  GradCheckResult result;
  for (std::size_t p = 0; p < params.count(); ++p) {
    Tensor<double> & value = params.at(p);
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.coords_per_param) {
      // Partial Fisher-Yates: first coords_per_param entries become the sample.
      for (std::size_t i = 0; i < options.coords_per_param; ++i) {
        const std::size_t j = i + rng.index(coords.size() - i);
        std::swap(coords[i], coords[j]);
      }
      coords.resize(options.coords_per_param);
    }
    for (const std::size_t i : coords) {
      const double saved = value[i];
      value[i] = saved + options.eps;
      const double up = evaluate(f, params);
      value[i] = saved - options.eps;
      const double down = evaluate(f, params);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic.at(p)[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coords_checked;
      if (result.worst_param.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = params.names()[p];
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace bfc
