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

#include "bfc/optim.hpp"

#include "bfc/errors.hpp"

#include <cmath>
#include <numbers>

namespace bfc
{

void LrSchedule::validate() const
{
  if (!(lr_max > 0.0) || !(lr_min > 0.0) || lr_min > lr_max) {
    throw ConfigError("learning rates need 0 < lr_min <= lr_max");
  }
  if (first_period < 1 || num_periods < 1) {
    throw ConfigError("schedule needs at least one period of at least one epoch");
  }
  if (annealing_end() > total_epochs) {
    throw ConfigError(
      "restart periods end at epoch " + std::to_string(annealing_end()) + ", after total_epochs " +
      std::to_string(total_epochs));
  }
}

std::vector<int> LrSchedule::period_lengths() const
{
  std::vector<int> out;
  int len = first_period;
  for (int i = 0; i < num_periods; ++i) {
    out.push_back(len);
    len *= 2;
  }
  return out;
}

std::vector<int> LrSchedule::boundaries() const
{
  std::vector<int> out{0};
  for (int len : period_lengths()) {
    out.push_back(out.back() + len);
  }
  return out;
}

int LrSchedule::annealing_end() const { return boundaries().back(); }

double LrSchedule::lr_at(double epoch) const
{
  if (!(epoch >= 0.0) || epoch >= static_cast<double>(total_epochs)) {
    throw ContractError(
      "lr_at: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(total_epochs) + ")");
  }
  int start = 0;
  for (int len : period_lengths()) {
    if (epoch < static_cast<double>(start + len)) {
      const double phase = (epoch - start) / static_cast<double>(len);
      return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
    }
    start += len;
  }
  return lr_min;
}

template <typename T>
NAdam<T>::NAdam(const ParamStore<T> & params, NAdamOptions options)
: options_(options), names_(params.names())
{
  for (std::size_t i = 0; i < params.count(); ++i) {
    State s;
    s.m.assign(params.at(i).size(), 0.0);
    s.v.assign(params.at(i).size(), 0.0);
    state_.push_back(std::move(s));
  }
}

template <typename T>
void NAdam<T>::step(
  ParamStore<T> & params, const ParamStore<T> & grads, double lr,
  const std::function<bool(const std::string &)> & active)
{
  if (params.names() != names_ || grads.names() != names_) {
    throw ContractError("NAdam: parameters or gradients are not keyed like the optimizer state");
  }
  if (!(lr > 0.0)) {
    throw ContractError("NAdam: learning rate must be positive");
  }
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const auto mu = [&](double t) { return b1 * (1.0 - 0.5 * std::pow(0.96, t * options_.momentum_decay)); };

  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (active && !active(names_[i])) {
      continue;
    }
    Tensor<T> & theta = params.at(i);
    const Tensor<T> & g = grads.at(i);
    if (g.shape() != theta.shape()) {
      throw ContractError("NAdam: gradient shape mismatch for '" + names_[i] + "'");
    }
    State & s = state_[i];
    s.step += 1;
    const auto t = static_cast<double>(s.step);
    const double mu_t = mu(t);
    const double mu_next = mu(t + 1.0);
    s.mu_product *= mu_t;
    const double mu_product_next = s.mu_product * mu_next;
    const double bias2 = 1.0 - std::pow(b2, t);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = static_cast<double>(g[j]);
      s.m[j] = b1 * s.m[j] + (1.0 - b1) * gj;
      s.v[j] = b2 * s.v[j] + (1.0 - b2) * gj * gj;
      const double m_hat = mu_next * s.m[j] / (1.0 - mu_product_next) + (1.0 - mu_t) * gj / (1.0 - s.mu_product);
      const double denom = std::sqrt(s.v[j] / bias2) + options_.eps;
      theta[j] = static_cast<T>(static_cast<double>(theta[j]) - lr * m_hat / denom);
    }
  }
}

template <typename T>
void NAdam<T>::save(Checkpoint & ckpt, const std::string & prefix) const
{
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const State & s = state_[i];
    ckpt.entries.push_back({prefix + "m." + names_[i], {s.m.size()}, s.m});
    ckpt.entries.push_back({prefix + "v." + names_[i], {s.v.size()}, s.v});
    ckpt.entries.push_back(
      {prefix + "t." + names_[i], {2}, std::vector<double>{static_cast<double>(s.step), s.mu_product}});
  }
}

template <typename T>
void NAdam<T>::load(const Checkpoint & ckpt, const std::string & prefix)
{
  const auto values = [&](const std::string & key, std::size_t n) {
    const auto & e = ckpt.entry(key);
    const auto * v = std::get_if<std::vector<double>>(&e.values);
    if (v == nullptr || v->size() != n) {
      throw ShapeError("optimizer entry '" + key + "' has the wrong type or size");
    }
    return *v;
  };
  for (std::size_t i = 0; i < names_.size(); ++i) {
    State & s = state_[i];
    s.m = values(prefix + "m." + names_[i], s.m.size());
    s.v = values(prefix + "v." + names_[i], s.v.size());
    const auto t = values(prefix + "t." + names_[i], 2);
    s.step = static_cast<std::size_t>(t[0]);
    s.mu_product = t[1];
  }
}

template class NAdam<float>;
template class NAdam<double>;

}  // namespace bfc
