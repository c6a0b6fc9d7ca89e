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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fagfcs/model.hpp"

namespace fagfcs {

/// Absolute tolerance for cost equality tests (ties, weak inequalities).
inline constexpr double kCompareTolerance = 1e-9;

/// H_k = 1 + 1/2 + ... + 1/k by direct summation; H_0 = 0.
[[nodiscard]] inline double harmonic(std::size_t k) noexcept {
  double h = 0.0;
  for (std::size_t t = 1; t <= k; ++t) h += 1.0 / static_cast<double>(t);
  return h;
}

/// H_0..H_n, each entry summed in the same order as `harmonic`.
[[nodiscard]] inline std::vector<double> harmonic_table(std::size_t n) {
  std::vector<double> h(n + 1, 0.0);
  for (std::size_t t = 1; t <= n; ++t) h[t] = h[t - 1] + 1.0 / static_cast<double>(t);
  return h;
}

struct AgentCost {
  double distance = 0.0;
  double share = 0.0;
  double total = 0.0;
};

struct CostBreakdown {
  std::vector<AgentCost> per_agent;
  double social_cost = 0.0;
};

/// c(x_i, s, e) = |x_i - l_{s_i}| + b_{s_i} / n_{s_i}(s).
[[nodiscard]] inline double agent_cost(AgentIndex i, const Profile& x, const Assignment& s,
                                       const Environment& env) {
  if (i >= x.size() || i >= s.size()) throw ValidationError("agent index out of range");
  const FacilityIndex j = s.at(i);
  std::size_t users = 0;
  for (FacilityIndex other : s.choices()) users += (other == j) ? 1 : 0;
  return std::abs(x[i] - env.location(j)) + env.building_cost(j) / static_cast<double>(users);
}

/// Cost agent `i` would pay after unilaterally switching to `target`.
[[nodiscard]] inline double deviation_cost(AgentIndex i, FacilityIndex target, const Profile& x,
                                           const Assignment& s, const Environment& env,
                                           std::span<const std::size_t> loads) {
  const std::size_t users = (s[i] == target) ? loads[target] : loads[target] + 1;
  return std::abs(x[i] - env.location(target)) +
         env.building_cost(target) / static_cast<double>(users);
}

[[nodiscard]] inline CostBreakdown social_cost(const Profile& x, const Assignment& s,
                                               const Environment& env) {
  validate(s, x, env);
  const auto loads = facility_loads(s, env.size());
  CostBreakdown out;
  out.per_agent.reserve(x.size());
  for (AgentIndex i = 0; i < x.size(); ++i) {
    AgentCost c;
    c.distance = std::abs(x[i] - env.location(s[i]));
    c.share = env.building_cost(s[i]) / static_cast<double>(loads[s[i]]);
    c.total = c.distance + c.share;
    out.social_cost += c.total;
    out.per_agent.push_back(c);
  }
  return out;
}

/// SC written per facility: sum of used building costs plus all distances.
[[nodiscard]] inline double social_cost_by_facility(const Profile& x, const Assignment& s,
                                                    const Environment& env) {
  validate(s, x, env);
  double total = 0.0;
  for (FacilityIndex j : used_facilities(s, env.size())) total += env.building_cost(j);
  for (AgentIndex i = 0; i < x.size(); ++i) total += std::abs(x[i] - env.location(s[i]));
  return total;
}

/// Rosenthal potential: harmonic building-cost terms of every used facility
/// plus the total connection distance.
[[nodiscard]] inline double potential(const Profile& x, const Assignment& s, const Environment& env) {
  validate(s, x, env);
  const auto loads = facility_loads(s, env.size());
  double building = 0.0;
  for (FacilityIndex j = 0; j < env.size(); ++j) {
    for (std::size_t k = 1; k <= loads[j]; ++k) {
      building += env.building_cost(j) / static_cast<double>(k);
    }
  }
  double distance = 0.0;
  for (AgentIndex i = 0; i < x.size(); ++i) distance += std::abs(x[i] - env.location(s[i]));
  return building + distance;
}

/// The same potential grouped by facility: one phi(A_j(s), j) term per used facility.
[[nodiscard]] inline double potential_by_facility(const Profile& x, const Assignment& s,
                                                  const Environment& env) {
  validate(s, x, env);
  double total = 0.0;
  for (FacilityIndex j : used_facilities(s, env.size())) {
    const auto members = agents_at(s, j);
    double term = env.building_cost(j) * harmonic(members.size());
    for (AgentIndex i : members) term += std::abs(x[i] - env.location(j));
    total += term;
  }
  return total;
}

/// phi([first, last], f) over agents `first..last` (0-based, inclusive) of an
/// ascending position list.
[[nodiscard]] inline double block_cost(std::size_t first, std::size_t last, FacilityIndex facility,
                                       std::span<const double> sorted_positions,
                                       const Environment& env) {
  if (first > last || last >= sorted_positions.size()) {
    throw ValidationError("block must be a non-empty agent range");
  }
  const double loc = env.location(facility);
  double total = env.building_cost(facility) * harmonic(last - first + 1);
  for (std::size_t a = first; a <= last; ++a) total += std::abs(sorted_positions[a] - loc);
  return total;
}

/// O(1) range distance sums |x_a - l_f| over a sorted position list after
/// O(n m) preparation.
class BlockDistances {
 public:
  BlockDistances(std::span<const double> sorted_positions, const Environment& env)
      : prefix_(sorted_positions.size() + 1, 0.0), split_(env.size()), env_(&env) {
    for (std::size_t a = 0; a < sorted_positions.size(); ++a) {
      prefix_[a + 1] = prefix_[a] + sorted_positions[a];
    }
    // split_[f] = number of agents strictly left of facility f.
    for (FacilityIndex f = 0; f < env.size(); ++f) {
      const auto it = std::lower_bound(sorted_positions.begin(), sorted_positions.end(),
                                       env.location(f));
      split_[f] = static_cast<std::size_t>(it - sorted_positions.begin());
    }
  }

  /// Sum over agents first..last (inclusive) of |x_a - l_f|.
  [[nodiscard]] double distance(std::size_t first, std::size_t last, FacilityIndex f) const {
    const double loc = env_->location(f);
    const std::size_t end = last + 1;
    const std::size_t mid = std::clamp(split_[f], first, end);
    const double left = loc * static_cast<double>(mid - first) - (prefix_[mid] - prefix_[first]);
    const double right = (prefix_[end] - prefix_[mid]) - loc * static_cast<double>(end - mid);
    return left + right;
  }

 private:
  std::vector<double> prefix_;
  std::vector<std::size_t> split_;
  const Environment* env_;
};

}  // namespace fagfcs
