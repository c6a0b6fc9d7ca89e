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

// Grid-based audits of mechanism properties.
//
// A mechanism here is anything callable as `Assignment(const Profile&)` with
// the environment already bound. Audits enumerate profiles over a finite set
// of positions and report every violation they find, keeping the first
// `max_counterexamples` in enumeration order.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fagfcs/costs.hpp"
#include "fagfcs/mechanisms.hpp"
#include "fagfcs/model.hpp"
#include "fagfcs/optimal.hpp"

namespace fagfcs {

template <class F>
concept MechanismFunction = requires(const F& f, const Profile& x) {
  { f(x) } -> std::convertible_to<Assignment>;
};

// ---------------------------------------------------------------------------
// Grids

struct GridOptions {
  bool offsets = true;    // add +/- offset around every critical point
  double offset = 1e-3;
  bool midpoints = true;  // add midpoints between consecutive critical points
  bool far_points = true; // one point well outside each end
};

/// Positions where an n-agent mechanism's case analysis can switch.
///
/// Always: every facility location and every pairwise indifference point of
/// tau with n agents. With two facilities also L + l_1, M + l_1, R + l_1 and
/// the two boundaries of the optimal zones, (delta - b_1)/2 + l_1 and
/// (delta + b_2)/2 + l_1.
[[nodiscard]] inline std::vector<double> critical_points(const Environment& env, std::size_t n) {
  std::vector<double> pts(env.locations().begin(), env.locations().end());
  const double share = static_cast<double>(n);
  for (FacilityIndex a = 0; a < env.size(); ++a) {
    for (FacilityIndex b = a + 1; b < env.size(); ++b) {
      const double la = env.location(a), lb = env.location(b);
      if (la == lb) continue;
      const double x = (la + lb + (env.building_cost(b) - env.building_cost(a)) / share) / 2;
      if (x > la && x < lb) pts.push_back(x);
    }
  }
  if (env.size() == 2) {
    const EnvParams p = env_params(env);
    const double l1 = env.location(0);
    pts.insert(pts.end(), {p.L + l1, p.M + l1, p.R + l1, (p.delta - env.building_cost(0)) / 2 + l1,
                           (p.delta + env.building_cost(1)) / 2 + l1});
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Sorted, de-duplicated audit grid built around critical_points.
[[nodiscard]] inline std::vector<double> breakpoint_grid(const Environment& env, std::size_t n,
                                                         const GridOptions& opt = {}) {
  const auto base = critical_points(env, n);
  std::vector<double> grid = base;
  if (opt.offsets) {
    for (double p : base) {
      grid.push_back(p - opt.offset);
      grid.push_back(p + opt.offset);
    }
  }
  if (opt.midpoints) {
    for (std::size_t t = 0; t + 1 < base.size(); ++t) grid.push_back((base[t] + base[t + 1]) / 2);
  }
  if (opt.far_points) {
    const double span = base.back() - base.front();
    grid.push_back(base.front() - span - 1.0);
    grid.push_back(base.back() + span + 1.0);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// `points` evenly spaced values on [lo, hi].
[[nodiscard]] inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g;
  if (points == 1) return {lo};
  for (std::size_t t = 0; t < points; ++t) {
    g.push_back(lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(points - 1));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Profile enumeration

enum class ProfileSpace {
  cartesian,  // every tuple in grid^n
  sorted,     // non-decreasing tuples only (multisets)
};

/// Calls `visit(const Profile&)` for each profile over `grid`.
template <class Visitor>
void for_each_profile(std::span<const double> grid, std::size_t n, ProfileSpace space, Visitor&& visit) {
  if (grid.empty()) throw ValidationError("audit grid must be nonempty");
  if (n < 1) throw ValidationError("n must be ≥ 1");
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> pos(n);
  while (true) {
    for (std::size_t a = 0; a < n; ++a) pos[a] = grid[idx[a]];
    visit(Profile(pos));
    std::size_t a = n;
    while (a > 0) {
      --a;
      if (++idx[a] < grid.size()) break;
      if (a == 0) return;
      idx[a] = 0;
    }
    if (space == ProfileSpace::sorted) {
      for (std::size_t b = a + 1; b < n; ++b) idx[b] = idx[a];
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

enum class AuditProperty { strategyproof, anonymous, unanimous };

[[nodiscard]] inline std::string_view to_string(AuditProperty p) {
  switch (p) {
    case AuditProperty::strategyproof: return "strategyproof";
    case AuditProperty::anonymous: return "anonymous";
    case AuditProperty::unanimous: return "unanimous";
  }
  return "unknown";
}

struct Counterexample {
  std::vector<double> profile;
  std::optional<AgentIndex> agent;
  std::optional<double> misreport;          // strategyproofness
  std::vector<std::size_t> permutation;     // anonymity
  std::vector<FacilityIndex> outcome;       // f(profile)
  std::vector<FacilityIndex> other_outcome; // f(deviated or permuted profile)
  double cost_before = 0.0;
  double cost_after = 0.0;
};

struct AuditReport {
  AuditProperty property = AuditProperty::strategyproof;
  bool passed = true;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::vector<Counterexample> counterexamples;
};

struct AuditOptions {
  ProfileSpace space = ProfileSpace::cartesian;
  std::size_t max_counterexamples = 10;
  std::size_t random_permutations = 100;  // used when n > 5
  std::uint64_t seed = 0;
};

namespace detail {

inline void record(AuditReport& r, const AuditOptions& opt, Counterexample cx) {
  ++r.violations;
  r.passed = false;
  if (r.counterexamples.size() < opt.max_counterexamples) r.counterexamples.push_back(std::move(cx));
}

inline std::vector<FacilityIndex> to_vector(const Assignment& s) {
  return {s.choices().begin(), s.choices().end()};
}

inline std::vector<double> to_vector(const Profile& x) { return {x.positions().begin(), x.positions().end()}; }

}  // namespace detail

/// No agent lowers her true cost by more than kCompareTolerance by reporting
/// any position in `misreports` instead of her own.
template <MechanismFunction Mech>
[[nodiscard]] AuditReport audit_strategyproof(const Mech& f, const Environment& env, std::size_t n,
                                              std::span<const double> grid,
                                              std::span<const double> misreports,
                                              const AuditOptions& opt = {}) {
  if (misreports.empty()) throw ValidationError("misreport set must be nonempty");
  AuditReport r;
  r.property = AuditProperty::strategyproof;
  for_each_profile(grid, n, opt.space, [&](const Profile& x) {
    const Assignment truthful = f(x);
    for (AgentIndex i = 0; i < n; ++i) {
      const double before = agent_cost(i, x, truthful, env);
      for (double lie : misreports) {
        if (lie == x[i]) continue;
        ++r.checks;
        const Assignment out = f(x.with_position(i, lie));
        const double after = agent_cost(i, x, out, env);
        if (after < before - kCompareTolerance) {
          detail::record(r, opt, Counterexample{detail::to_vector(x), i, lie, {}, detail::to_vector(truthful),
                                                detail::to_vector(out), before, after});
        }
      }
    }
  });
  return r;
}

/// Permuting the reports permutes the outcome the same way: the agent
/// reporting x_{pi(i)} gets the facility the original reporter got.
template <MechanismFunction Mech>
[[nodiscard]] AuditReport audit_anonymous(const Mech& f, const Environment& env, std::size_t n,
                                          std::span<const double> grid, const AuditOptions& opt = {}) {
  AuditReport r;
  r.property = AuditProperty::anonymous;
  std::mt19937_64 rng(opt.seed);

  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> pi(n);
  std::iota(pi.begin(), pi.end(), std::size_t{0});
  if (n <= 5) {
    do perms.push_back(pi);
    while (std::next_permutation(pi.begin(), pi.end()));
  } else {
    for (std::size_t t = 0; t < opt.random_permutations; ++t) {
      std::shuffle(pi.begin(), pi.end(), rng);
      perms.push_back(pi);
    }
  }

  for_each_profile(grid, n, opt.space, [&](const Profile& x) {
    const Assignment out = f(x);
    for (const auto& p : perms) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = x[p[i]];
      const Profile permuted(y);
      const Assignment out_perm = f(permuted);
      ++r.checks;
      for (std::size_t i = 0; i < n; ++i) {
        if (out_perm[i] != out[p[i]]) {
          Counterexample cx{detail::to_vector(x), p[i], std::nullopt, p, detail::to_vector(out),
                            detail::to_vector(out_perm), agent_cost(p[i], x, out, env),
                            agent_cost(i, permuted, out_perm, env)};
          detail::record(r, opt, std::move(cx));
          break;
        }
      }
    }
  });
  return r;
}

/// When every agent's best assignment is uniquely facility j, the outcome
/// sends everyone to j.
template <MechanismFunction Mech>
[[nodiscard]] AuditReport audit_unanimous(const Mech& f, const Environment& env, std::size_t n,
                                          std::span<const double> grid, const AuditOptions& opt = {}) {
  AuditReport r;
  r.property = AuditProperty::unanimous;
  for_each_profile(grid, n, opt.space, [&](const Profile& x) {
    std::optional<FacilityIndex> common;
    for (AgentIndex i = 0; i < n; ++i) {
      const auto best = strict_best_assignment(x[i], env, n);
      if (!best || (common && *common != *best)) return;
      common = best;
    }
    ++r.checks;
    const Assignment out = f(x);
    for (AgentIndex i = 0; i < n; ++i) {
      if (out[i] != *common) {
        const Assignment want = Assignment::uniform(n, *common);
        detail::record(r, opt, Counterexample{detail::to_vector(x), i, std::nullopt, {}, detail::to_vector(out),
                                              detail::to_vector(want), agent_cost(i, x, out, env),
                                              agent_cost(i, x, want, env)});
        return;
      }
    }
  });
  return r;
}

// ---------------------------------------------------------------------------
// Necessary conditions P1-P5

struct PropertyCheck {
  std::string name;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::optional<std::vector<double>> witness_profile;
  std::optional<std::vector<double>> witness_other;  // second profile of a pair, if any

  [[nodiscard]] bool holds() const noexcept { return violations == 0; }
};

struct LemmaReport {
  std::array<PropertyCheck, 5> properties = [] {
    std::array<PropertyCheck, 5> ps;
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i].name = "P" + std::to_string(i + 1);
    return ps;
  }();

  [[nodiscard]] bool all_hold() const {
    return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.holds(); });
  }
};

/// Checks P1-P3 on every grid profile pair differing in one agent's report,
/// and P4-P5 on every two-agent grid profile with distinct reports.
template <MechanismFunction Mech>
[[nodiscard]] LemmaReport audit_lemma_properties(const Mech& f, const Environment& env, std::size_t n,
                                                 std::span<const double> grid) {
  LemmaReport rep;
  auto& p1 = rep.properties[0];
  auto& p2 = rep.properties[1];
  auto& p3 = rep.properties[2];
  auto& p4 = rep.properties[3];
  auto& p5 = rep.properties[4];
  const auto fail = [](PropertyCheck& pc, const Profile& a, const Profile* b) {
    if (pc.violations++ == 0) {
      pc.witness_profile = detail::to_vector(a);
      if (b) pc.witness_other = detail::to_vector(*b);
    }
  };

  for_each_profile(grid, n, ProfileSpace::cartesian, [&](const Profile& x) {
    const Assignment out = f(x);
    const auto loads = facility_loads(out, env.size());

    for (AgentIndex i = 0; i < n; ++i) {
      const FacilityIndex j = out[i];
      for (double alt : grid) {
        if (alt == x[i]) continue;
        const Profile xp = x.with_position(i, alt);
        const Assignment outp = f(xp);
        const FacilityIndex jp = outp[i];
        const std::size_t nj = loads[j];
        const std::size_t njp = facility_loads(outp, env.size())[jp];
        const double lj = env.location(j), ljp = env.location(jp);

        ++p1.checks;
        if (x[i] < alt && ljp < lj && !(alt <= ljp || lj <= x[i])) fail(p1, x, &xp);

        ++p2.checks;
        const double shares = env.building_cost(j) / static_cast<double>(nj) -
                              env.building_cost(jp) / static_cast<double>(njp);
        const double lower = std::abs(alt - ljp) - std::abs(alt - lj);
        const double upper = std::abs(x[i] - ljp) - std::abs(x[i] - lj);
        if (lower > shares + kCompareTolerance || shares > upper + kCompareTolerance) fail(p2, x, &xp);

        if (j == jp) {
          ++p3.checks;
          if (nj != facility_loads(outp, env.size())[j]) fail(p3, x, &xp);
        }
      }
    }

    if (n == 2 && env.size() == 2 && x[0] != x[1]) {
      const AgentIndex a = x[0] < x[1] ? 0 : 1;
      const AgentIndex b = 1 - a;
      const bool disjoint = std::max(x[a], env.location(0)) >= std::min(x[b], env.location(1));
      if (disjoint) {
        ++p4.checks;
        if (out[a] != out[b]) fail(p4, x, nullptr);
      } else {
        ++p5.checks;
        if (out[a] == 1 && out[b] == 0) fail(p5, x, nullptr);
      }
    }
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Approximation ratio

struct RatioResult {
  double worst_ratio = 0.0;
  std::vector<double> witness_profile;
};

/// max over grid profiles of SC(f(x)) / OPT(x).
template <MechanismFunction Mech>
[[nodiscard]] RatioResult empirical_ratio(const Mech& f, const Environment& env, std::size_t n,
                                          std::span<const double> grid) {
  RatioResult best;
  for_each_profile(grid, n, ProfileSpace::cartesian, [&](const Profile& x) {
    const double sc = social_cost(x, f(x), env).social_cost;
    const double opt = optimal_block_dp(Instance{env, x, std::nullopt}).social_cost;
    const double ratio = sc / opt;
    if (best.witness_profile.empty() || ratio > best.worst_ratio) {
      best.worst_ratio = ratio;
      best.witness_profile = detail::to_vector(x);
    }
  });
  return best;
}

}  // namespace fagfcs
