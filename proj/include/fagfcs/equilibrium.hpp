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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fagfcs/costs.hpp"
#include "fagfcs/model.hpp"
#include "fagfcs/partition_dp.hpp"

namespace fagfcs {

/// An improving unilateral move.
struct Deviation {
  AgentIndex agent = 0;
  FacilityIndex better_facility = 0;
  double improvement = 0.0;  // current cost minus deviation cost, > 0
};

struct PneVerdict {
  bool is_pne = true;
  std::optional<Deviation> witness;

  explicit operator bool() const noexcept { return is_pne; }
};

/// Pure Nash equilibrium test with weak inequalities: a deviation refutes the
/// profile only if it lowers the mover's cost by more than kCompareTolerance.
/// The witness is the first agent (by index) with an improving move, moving
/// to its best response.
[[nodiscard]] inline PneVerdict is_pne(const Profile& x, const Assignment& s, const Environment& env) {
  validate(s, x, env);
  const auto loads = facility_loads(s, env.size());
  for (AgentIndex i = 0; i < x.size(); ++i) {
    const double current = deviation_cost(i, s[i], x, s, env, loads);
    std::optional<Deviation> best;
    for (FacilityIndex j = 0; j < env.size(); ++j) {
      if (j == s[i]) continue;
      const double gain = current - deviation_cost(i, j, x, s, env, loads);
      if (gain > kCompareTolerance && (!best || gain > best->improvement)) {
        best = Deviation{i, j, gain};
      }
    }
    if (best) return PneVerdict{false, best};
  }
  return PneVerdict{};
}

/// Best response of agent `i` against the others' choices in `s`.
///
/// Keeps the current facility unless some facility is cheaper by more than
/// kCompareTolerance; then returns the cheapest, smallest index first.
[[nodiscard]] inline FacilityIndex best_response(AgentIndex i, const Profile& x, const Assignment& s,
                                                 const Environment& env) {
  validate(s, x, env);
  if (i >= x.size()) throw ValidationError("agent index out of range");
  const auto loads = facility_loads(s, env.size());
  const double current = deviation_cost(i, s[i], x, s, env, loads);
  FacilityIndex best = s[i];
  double best_cost = current;
  for (FacilityIndex j = 0; j < env.size(); ++j) {
    if (j == s[i]) continue;
    const double c = deviation_cost(i, j, x, s, env, loads);
    if (c < current - kCompareTolerance && (best == s[i] || c < best_cost)) {
      best = j;
      best_cost = c;
    }
  }
  return best;
}

enum class DynamicsOrder { round_robin, max_gain, seeded_random };

[[nodiscard]] inline std::string_view to_string(DynamicsOrder order) {
  switch (order) {
    case DynamicsOrder::round_robin: return "round-robin";
    case DynamicsOrder::max_gain: return "max-gain";
    case DynamicsOrder::seeded_random: return "seeded-random";
  }
  return "unknown";
}

[[nodiscard]] inline DynamicsOrder parse_dynamics_order(std::string_view name) {
  if (name == "round-robin") return DynamicsOrder::round_robin;
  if (name == "max-gain") return DynamicsOrder::max_gain;
  if (name == "seeded-random") return DynamicsOrder::seeded_random;
  throw ValidationError("unknown dynamics order '" + std::string(name) + "'");
}

struct DynamicsStep {
  AgentIndex agent = 0;
  FacilityIndex from_facility = 0;
  FacilityIndex to_facility = 0;
  double cost_delta = 0.0;  // new cost minus old cost (negative)
  double potential_after = 0.0;
};

struct DynamicsTrace {
  std::vector<DynamicsStep> steps;
  bool converged = false;
  Assignment final_assignment;
  double initial_potential = 0.0;
};

/// Best-response dynamics from `start`.
///
/// round_robin scans agents cyclically from the one after the last mover;
/// max_gain moves the agent with the largest gain (lowest index on ties);
/// seeded_random picks uniformly among agents that can improve.
[[nodiscard]] inline DynamicsTrace run_dynamics(const Instance& inst, const Assignment& start,
                                                DynamicsOrder order, std::size_t max_steps,
                                                std::uint64_t seed = 0) {
  const Profile& x = inst.profile;
  const Environment& env = inst.environment;
  validate(start, x, env);

  std::mt19937_64 rng(seed);
  DynamicsTrace trace;
  trace.initial_potential = potential(x, start, env);
  Assignment s = start;
  std::size_t cursor = 0;

  const auto gain_of = [&](AgentIndex i, FacilityIndex& target) {
    target = best_response(i, x, s, env);
    if (target == s[i]) return 0.0;
    const auto loads = facility_loads(s, env.size());
    return deviation_cost(i, s[i], x, s, env, loads) - deviation_cost(i, target, x, s, env, loads);
  };

  while (true) {
    std::vector<std::pair<AgentIndex, FacilityIndex>> movers;
    std::vector<double> gains;
    for (AgentIndex off = 0; off < x.size(); ++off) {
      const AgentIndex i = (order == DynamicsOrder::round_robin) ? (cursor + off) % x.size() : off;
      FacilityIndex target = 0;
      const double g = gain_of(i, target);
      if (target != s[i]) {
        movers.emplace_back(i, target);
        gains.push_back(g);
        if (order == DynamicsOrder::round_robin) break;
      }
    }
    if (movers.empty()) {
      trace.converged = true;
      break;
    }
    if (trace.steps.size() >= max_steps) break;

    std::size_t pick = 0;
    if (order == DynamicsOrder::max_gain) {
      for (std::size_t t = 1; t < movers.size(); ++t) {
        if (gains[t] > gains[pick]) pick = t;
      }
    } else if (order == DynamicsOrder::seeded_random) {
      pick = uniform_index(rng, 0, movers.size() - 1);
    }

    const auto [agent, target] = movers[pick];
    DynamicsStep step;
    step.agent = agent;
    step.from_facility = s[agent];
    step.to_facility = target;
    step.cost_delta = -gains[pick];
    s = s.with_choice(agent, target);
    step.potential_after = potential(x, s, env);
    trace.steps.push_back(step);
    cursor = agent + 1;
  }
  trace.final_assignment = std::move(s);
  return trace;
}

/// Potential-minimizing assignment found by the consecutive-block DP, plus
/// the blocks over sorted agents.
struct PneSolution {
  Assignment assignment;
  double potential = 0.0;
  std::vector<Block> blocks;
  std::vector<AgentIndex> sorted_order;
};

[[nodiscard]] inline PneSolution solve_pne_dp(const Instance& inst) {
  const Profile& x = inst.profile;
  const Environment& env = inst.environment;
  const auto order = sorted_agent_order(x);
  std::vector<double> sorted(order.size());
  for (std::size_t a = 0; a < order.size(); ++a) sorted[a] = x[order[a]];

  const BlockDistances dist(sorted, env);
  const auto h = harmonic_table(x.size());
  const auto phi = [&](std::size_t first, std::size_t last, FacilityIndex f) {
    return env.building_cost(f) * h[last - first + 1] + dist.distance(first, last, f);
  };
  auto part = solve_consecutive_partition(x.size(), env.size(), phi);
  return PneSolution{blocks_to_assignment(part.blocks, order), part.value, std::move(part.blocks),
                     order};
}

/// A pure Nash equilibrium minimizing the potential, computed in O(n^2 m^2).
///
/// With `verify` the result is re-checked with is_pne; debug builds always
/// verify. A failed check throws std::logic_error.
[[nodiscard]] inline Assignment compute_pne_dp(const Instance& inst, bool verify = false) {
  auto sol = solve_pne_dp(inst);
#ifndef NDEBUG
  verify = true;
#endif
  if (verify && !is_pne(inst.profile, sol.assignment, inst.environment)) {
    throw std::logic_error("DP result failed the equilibrium check");
  }
  return std::move(sol.assignment);
}

struct HarmonicBoundCheck {
  double ratio = 0.0;  // SC(pne) / SC(opt)
  double bound = 0.0;  // H_n
  bool holds = false;
  double log_bound = 0.0;  // ln n, reported only
  bool holds_log = false;
};

[[nodiscard]] inline HarmonicBoundCheck check_harmonic_bound(const Instance& inst, const Assignment& pne,
                                                             const Assignment& opt) {
  const double sc_pne = social_cost(inst.profile, pne, inst.environment).social_cost;
  const double sc_opt = social_cost(inst.profile, opt, inst.environment).social_cost;
  HarmonicBoundCheck out;
  out.ratio = sc_pne / sc_opt;
  out.bound = harmonic(inst.agent_count());
  out.holds = out.ratio <= out.bound + kCompareTolerance;
  out.log_bound = std::log(static_cast<double>(inst.agent_count()));
  out.holds_log = out.ratio <= out.log_bound + kCompareTolerance;
  return out;
}

/// A pair of agents violating the left-to-right order.
struct CrossingPair {
  AgentIndex left = 0;   // x_left < x_right
  AgentIndex right = 0;  // but l_{s_left} > l_{s_right}
};

struct NoCrossVerdict {
  bool holds = true;
  std::optional<CrossingPair> witness;

  explicit operator bool() const noexcept { return holds; }
};

[[nodiscard]] inline NoCrossVerdict check_no_cross(const Profile& x, const Assignment& s,
                                                   const Environment& env) {
  validate(s, x, env);
  for (AgentIndex a = 0; a < x.size(); ++a) {
    for (AgentIndex b = 0; b < x.size(); ++b) {
      if (x[a] < x[b] && env.location(s[a]) > env.location(s[b])) {
        return NoCrossVerdict{false, CrossingPair{a, b}};
      }
    }
  }
  return NoCrossVerdict{};
}

/// True when every A_j(s) is a contiguous run of agents in sorted order
/// (ties by input index).
[[nodiscard]] inline bool has_consecutive_blocks(const Profile& x, const Assignment& s,
                                                 const Environment& env) {
  validate(s, x, env);
  const auto order = sorted_agent_order(x);
  std::vector<bool> closed(env.size(), false);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const FacilityIndex j = s[order[a]];
    if (closed[j]) return false;
    if (a + 1 == order.size() || s[order[a + 1]] != j) closed[j] = true;
  }
  return true;
}

}  // namespace fagfcs
