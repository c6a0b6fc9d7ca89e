// Copyright 2026 The fagfcs Authors.
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

// Minimum social cost OPT(x, e).
//
// The block DP relies on an exchange argument rather than on an equilibrium
// property. Take an optimal assignment and two agents a, b with x_a < x_b but
// l_{s_a} > l_{s_b}. Swapping their facilities keeps every load n_j, hence
// every cost share, and |x_a - l_{s_b}| + |x_b - l_{s_a}| never exceeds
// |x_a - l_{s_a}| + |x_b - l_{s_b}| on the line. Repeating the swap gives an
// optimal assignment without crossings, so every used facility serves a
// consecutive run of sorted agents and the runs appear left to right. Two
// runs on co-located facilities can be merged onto the cheaper one without
// raising the cost, so facilities may be taken strictly increasing. The
// brute-force solver is the oracle that guards this argument in tests.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "fagfcs/costs.hpp"
#include "fagfcs/model.hpp"
#include "fagfcs/partition_dp.hpp"

namespace fagfcs {

enum class OptMethod { brute_force, block_dp };

[[nodiscard]] inline std::string_view to_string(OptMethod m) {
  return m == OptMethod::brute_force ? "brute_force" : "block_dp";
}

struct OptResult {
  Assignment assignment;
  double social_cost = 0.0;
  OptMethod method = OptMethod::block_dp;
};

/// Largest m^n the exhaustive solver accepts.
inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// m^n, saturating at kBruteForceLimit + 1.
[[nodiscard]] inline std::uint64_t assignment_space_size(std::size_t n, std::size_t m) {
  std::uint64_t total = 1;
  for (std::size_t t = 0; t < n; ++t) {
    total *= m;
    if (total > kBruteForceLimit) return kBruteForceLimit + 1;
  }
  return total;
}

/// Calls `visit(const Assignment&)` for every assignment in [m]^n,
/// lexicographic with agent 0 most significant.
template <class Visitor>
void for_each_assignment(std::size_t n, std::size_t m, Visitor&& visit) {
  std::vector<FacilityIndex> digits(n, 0);
  while (true) {
    visit(Assignment(digits));
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < m) break;
      digits[pos] = 0;
      if (pos == 0) return;
    }
  }
}

/// Exhaustive minimum; the lexicographically smallest minimizer wins ties.
[[nodiscard]] inline OptResult optimal_brute_force(const Instance& inst) {
  const std::size_t n = inst.agent_count();
  const std::size_t m = inst.facility_count();
  if (assignment_space_size(n, m) > kBruteForceLimit) {
    throw ValidationError("brute force needs m^n <= 10^7");
  }
  OptResult best;
  best.method = OptMethod::brute_force;
  best.social_cost = std::numeric_limits<double>::infinity();
  for_each_assignment(n, m, [&](const Assignment& s) {
    const double sc = social_cost_by_facility(inst.profile, s, inst.environment);
    if (sc < best.social_cost) {
      best.social_cost = sc;
      best.assignment = s;
    }
  });
  best.social_cost = social_cost(inst.profile, best.assignment, inst.environment).social_cost;
  return best;
}

/// Consecutive-block DP with block cost b_f + sum of distances.
[[nodiscard]] inline OptResult optimal_block_dp(const Instance& inst) {
  const Profile& x = inst.profile;
  const Environment& env = inst.environment;
  const auto order = sorted_agent_order(x);
  std::vector<double> sorted(order.size());
  for (std::size_t a = 0; a < order.size(); ++a) sorted[a] = x[order[a]];

  const BlockDistances dist(sorted, env);
  const auto cost = [&](std::size_t first, std::size_t last, FacilityIndex f) {
    return env.building_cost(f) + dist.distance(first, last, f);
  };
  const auto part = solve_consecutive_partition(x.size(), env.size(), cost);

  OptResult out;
  out.method = OptMethod::block_dp;
  out.assignment = blocks_to_assignment(part.blocks, order);
  out.social_cost = social_cost(x, out.assignment, env).social_cost;
  return out;
}

/// Block DP for any size; callers wanting the oracle use optimal_brute_force.
[[nodiscard]] inline OptResult optimal(const Instance& inst) { return optimal_block_dp(inst); }

}  // namespace fagfcs
