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

#ifndef BFC__OPTIM_HPP_
#define BFC__OPTIM_HPP_

#include "bfc/checkpoint.hpp"
#include "bfc/param_store.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace bfc
{

/// Cosine annealing with warm restarts. Periods start at `first_period`
/// epochs and double after every restart; after the last period the rate
/// stays at lr_min until total_epochs. Defaults: periods 6, 12, 24, 48
/// (90 epochs) then lr_min until epoch 100.
struct LrSchedule
{
  double lr_max = 1e-3;
  double lr_min = 1e-5;
  int first_period = 6;
  int num_periods = 4;
  int total_epochs = 100;

  /// Throws ConfigError.
  void validate() const;

  std::vector<int> period_lengths() const;
  /// Start epoch of every period plus the end of the last one.
  std::vector<int> boundaries() const;
  int annealing_end() const;

  /// Throws ContractError outside [0, total_epochs).
  double lr_at(double epoch) const;
};

struct NAdamOptions
{
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum_decay = 0.004;  // mu_t = beta1 (1 - 0.5 * 0.96^(t * decay))
};

/// NAdam with the momentum schedule of the original formulation. Every
/// parameter keeps its own step count, so a parameter that joins the active
/// set later starts from a fresh bias correction.
template <typename T>
class NAdam
{
public:
  explicit NAdam(const ParamStore<T> & params, NAdamOptions options = {});

  /// Updates the parameters for which `active` returns true (all when empty).
  /// Throws ContractError if `grads` is not keyed like `params`.
  void step(
    ParamStore<T> & params, const ParamStore<T> & grads, double lr,
    const std::function<bool(const std::string &)> & active = {});

  std::size_t steps(std::size_t param) const { return state_.at(param).step; }

  void save(Checkpoint & ckpt, const std::string & prefix = "opt.") const;
  void load(const Checkpoint & ckpt, const std::string & prefix = "opt.");

private:
  struct State
  {
    std::size_t step = 0;
    double mu_product = 1.0;
    std::vector<double> m;
    std::vector<double> v;
  };

  NAdamOptions options_;
  std::vector<std::string> names_;
  std::vector<State> state_;
};

}  // namespace bfc

#endif  // BFC__OPTIM_HPP_
