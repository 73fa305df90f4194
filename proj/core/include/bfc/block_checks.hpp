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

#ifndef BFC__BLOCK_CHECKS_HPP_
#define BFC__BLOCK_CHECKS_HPP_

#include "bfc/grad_check.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bfc
{

struct BlockCheck
{
  std::string block;
  GradCheckResult result;
  bool passed = false;
  double seconds = 0.0;
};

/// Finite-difference checks of every network block and of the staged loss
/// through the whole pipeline, on a small synthetic scene in 64-bit mode.
/// Block inputs are registered as parameters so their gradients are checked
/// too.
std::vector<BlockCheck> run_block_checks(
  std::uint64_t seed, double tolerance = 1e-4, double eps = 1e-5);

}  // namespace bfc

#endif  // BFC__BLOCK_CHECKS_HPP_
