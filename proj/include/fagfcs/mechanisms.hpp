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
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fagfcs/costs.hpp"
#include "fagfcs/model.hpp"

namespace fagfcs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Two-facility environment parameters

/// Thresholds of a two-facility environment, measured from l_1.
///
/// M + l_1 is where an agent between the facilities is indifferent between
/// the two all-to-one outcomes with two agents; L and R bracket it.
struct EnvParams {
  double L = 0.0;
  double M = 0.0;
  double R = 0.0;
  double delta = 0.0;
};

inline void require_two_facilities(const Environment& env) {
  if (env.size() != 2) throw PreconditionError("operation needs exactly two facilities (m = 2)");
}

[[nodiscard]] inline EnvParams env_params(const Environment& env) {
  require_two_facilities(env);
  const double b1 = env.building_cost(0);
  const double b2 = env.building_cost(1);
  const double d = env.delta();
  return EnvParams{d / 2 + b2 / 4 - b1 / 2, d / 2 + b2 / 4 - b1 / 4, d / 2 + b2 / 2 - b1 / 4, d};
}

enum class MechanismType { I = 0, II = 1, III = 2, IV = 3, V = 4 };

using TypeSet = std::array<bool, 5>;

/// Environment classification against the five regime conditions.
///
/// `rows` lists every condition that holds (1-based, equalities within
/// kCompareTolerance); the printed rows overlap (row 5 also covers row 2 when
/// b1 > b2), so `row` is the first match. `table_types` is the union of types
/// the matching rows admit.
/// `constructible` is derived from M directly: II needs M = 0, III needs
/// M = delta, IV and V need 0 < M < delta, I is always available.
struct EnvClassification {
  int row = 0;
  std::vector<int> rows;
  TypeSet table_types{};
  TypeSet constructible{};
  double gap_left = 0.0;   // 2*delta - (b1 - b2); zero on row 2
  double gap_right = 0.0;  // 2*delta - (b2 - b1); zero on row 4
};

[[nodiscard]] inline bool near_zero(double v) { return std::abs(v) <= kCompareTolerance; }

[[nodiscard]] inline bool admits_type_ii(const EnvParams& p) { return near_zero(p.M); }
[[nodiscard]] inline bool admits_type_iii(const EnvParams& p) { return near_zero(p.M - p.delta); }
[[nodiscard]] inline bool admits_type_iv_v(const EnvParams& p) {
  return p.M > kCompareTolerance && p.M < p.delta - kCompareTolerance;
}

[[nodiscard]] inline EnvClassification classify_environment(const Environment& env) {
  const EnvParams p = env_params(env);
  const double b1 = env.building_cost(0);
  const double b2 = env.building_cost(1);
  const double two_delta = 2 * p.delta;

  EnvClassification c;
  c.gap_left = two_delta - (b1 - b2);
  c.gap_right = two_delta - (b2 - b1);

  // Regime rows as literally stated (they overlap) and the types each admits.
  static constexpr std::array<TypeSet, 5> kRowTypes{{
      {true, false, false, false, false},
      {true, true, false, false, false},
      {true, false, false, true, true},
      {true, false, true, false, false},
      {true, false, false, false, false},
  }};
  const std::array<bool, 5> holds{
      c.gap_left < -kCompareTolerance,
      near_zero(c.gap_left),
      c.gap_left > kCompareTolerance && c.gap_right < -kCompareTolerance,
      near_zero(c.gap_right),
      c.gap_right > kCompareTolerance,
  };
  for (int r = 0; r < 5; ++r) {
    if (!holds[r]) continue;
    if (c.rows.empty()) c.row = r + 1;
    c.rows.push_back(r + 1);
    for (int t = 0; t < 5; ++t) c.table_types[t] = c.table_types[t] || kRowTypes[r][t];
  }

  c.constructible[0] = true;
  c.constructible[1] = admits_type_ii(p);
  c.constructible[2] = admits_type_iii(p);
  c.constructible[3] = c.constructible[4] = admits_type_iv_v(p);
  return c;
}

// ---------------------------------------------------------------------------
// Best assignment of a position

/// Cost at position x when all n agents share facility j.
[[nodiscard]] inline double all_to_one_cost(double x, FacilityIndex j, const Environment& env,
                                            std::size_t n) {
  return std::abs(x - env.location(j)) + env.building_cost(j) / static_cast<double>(n);
}

/// tau(x): facility minimizing |x - l_j| + b_j / n, smallest index on ties.
[[nodiscard]] inline FacilityIndex best_assignment_tau(double x, const Environment& env, std::size_t n) {
  if (n < 1) throw ValidationError("n must be ≥ 1");
  FacilityIndex best = 0;
  double best_cost = all_to_one_cost(x, 0, env, n);
  for (FacilityIndex j = 1; j < env.size(); ++j) {
    const double c = all_to_one_cost(x, j, env, n);
    if (c < best_cost) {
      best = j;
      best_cost = c;
    }
  }
  return best;
}

/// tau(x) when it beats every other facility by more than kCompareTolerance.
[[nodiscard]] inline std::optional<FacilityIndex> strict_best_assignment(double x, const Environment& env,
                                                                         std::size_t n) {
  const FacilityIndex best = best_assignment_tau(x, env, n);
  const double best_cost = all_to_one_cost(x, best, env, n);
  for (FacilityIndex j = 0; j < env.size(); ++j) {
    if (j != best && all_to_one_cost(x, j, env, n) <= best_cost + kCompareTolerance) return std::nullopt;
  }
  return best;
}

/// k-th smallest reported position (k is 1-based).
[[nodiscard]] inline double kth_smallest(const Profile& x, std::size_t k) {
  if (k < 1 || k > x.size()) throw ValidationError("k must satisfy 1 <= k <= n");
  std::vector<double> v(x.positions().begin(), x.positions().end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

/// The k-rank mechanism: everyone goes to tau of the k-th smallest report.
[[nodiscard]] inline Assignment k_rank(const Profile& x, const Environment& env, std::size_t k) {
  const double theta = kth_smallest(x, k);
  return Assignment::uniform(x.size(), best_assignment_tau(theta, env, x.size()));
}

/// Each agent to its nearest facility, ignoring cost shares. Not
/// strategyproof in general; used as a reference in audits.
[[nodiscard]] inline Assignment nearest_facility_assignment(const Profile& x, const Environment& env) {
  std::vector<FacilityIndex> choices(x.size());
  for (AgentIndex i = 0; i < x.size(); ++i) {
    FacilityIndex best = 0;
    for (FacilityIndex j = 1; j < env.size(); ++j) {
      if (std::abs(x[i] - env.location(j)) < std::abs(x[i] - env.location(best))) best = j;
    }
    choices[i] = best;
  }
  return Assignment(std::move(choices));
}

// ---------------------------------------------------------------------------
// Mechanism specifications

/// Diagonal choice for Types II and III: both agents go to facility 1 when
/// x < threshold (or x <= threshold if inclusive), else to facility 2.
/// threshold = +inf is the constant "facility 1" choice, -inf the constant
/// "facility 2" choice.
struct DiagonalRule {
  double threshold = kInf;
  bool inclusive = false;

  [[nodiscard]] static DiagonalRule facility1() { return {kInf, false}; }
  [[nodiscard]] static DiagonalRule facility2() { return {-kInf, false}; }

  [[nodiscard]] FacilityIndex at(double x) const {
    const bool left = x < threshold || (inclusive && x == threshold);
    return left ? 0 : 1;
  }

  friend bool operator==(const DiagonalRule&, const DiagonalRule&) = default;
};

struct TypeI {
  FacilityIndex target = 0;
  friend bool operator==(const TypeI&, const TypeI&) = default;
};
struct TypeII {
  DiagonalRule diagonal;
  friend bool operator==(const TypeII&, const TypeII&) = default;
};
struct TypeIII {
  DiagonalRule diagonal;
  friend bool operator==(const TypeIII&, const TypeIII&) = default;
};
struct TypeIV {
  FacilityIndex boundary_choice = 0;
  friend bool operator==(const TypeIV&, const TypeIV&) = default;
};
struct TypeV {
  FacilityIndex boundary_choice = 0;
  friend bool operator==(const TypeV&, const TypeV&) = default;
};
struct KRank {
  std::size_t k = 1;  // 1-based rank
  friend bool operator==(const KRank&, const KRank&) = default;
};

using MechanismKind = std::variant<TypeI, TypeII, TypeIII, TypeIV, TypeV, KRank>;

struct MechanismSpec {
  MechanismKind kind;
  friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;
};

[[nodiscard]] inline std::string describe(const MechanismSpec& spec) {
  const auto fac = [](FacilityIndex j) { return std::to_string(j + 1); };
  const auto diag = [](const DiagonalRule& d) -> std::string {
    if (d.threshold == kInf) return "fac1";
    if (d.threshold == -kInf) return "fac2";
    return std::string(d.inclusive ? "fac1 iff x <= " : "fac1 iff x < ") + std::to_string(d.threshold);
  };
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, TypeI>) return "type1(target=" + fac(k.target) + ")";
        if constexpr (std::is_same_v<K, TypeII>) return "type2(diag=" + diag(k.diagonal) + ")";
        if constexpr (std::is_same_v<K, TypeIII>) return "type3(diag=" + diag(k.diagonal) + ")";
        if constexpr (std::is_same_v<K, TypeIV>) return "type4(boundary=" + fac(k.boundary_choice) + ")";
        if constexpr (std::is_same_v<K, TypeV>) return "type5(boundary=" + fac(k.boundary_choice) + ")";
        if constexpr (std::is_same_v<K, KRank>) return "krank(k=" + std::to_string(k.k) + ")";
      },
      spec.kind);
}

/// A mechanism spec bound to an environment whose preconditions it meets.
class Mechanism {
 public:
  /// Throws PreconditionError when the environment does not admit the type.
  Mechanism(MechanismSpec spec, Environment env) : spec_(std::move(spec)), env_(std::move(env)) {
    std::visit([this](const auto& k) { check(k); }, spec_.kind);
  }

  [[nodiscard]] const MechanismSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const Environment& environment() const noexcept { return env_; }

  /// sup{x : f(x, x) = (1, 1)}, resolved analytically for Types I-V;
  /// empty for k-rank, which is not tied to n = 2.
  [[nodiscard]] std::optional<double> x_star() const {
    return std::visit([this](const auto& k) { return star(k); }, spec_.kind);
  }

  [[nodiscard]] Assignment operator()(const Profile& x) const {
    if (const auto* kr = std::get_if<KRank>(&spec_.kind)) {
      if (kr->k > x.size()) throw PreconditionError("k-rank needs k <= n");
      return k_rank(x, env_, kr->k);
    }
    if (x.size() != 2) throw PreconditionError("Type I-V mechanisms are defined for two agents");
    // Order the two reports; the lower one plays x1. Ties keep agent order.
    const bool swapped = x[1] < x[0];
    const double lo = swapped ? x[1] : x[0];
    const double hi = swapped ? x[0] : x[1];
    const auto [f_lo, f_hi] = std::visit([&](const auto& k) { return pair_outcome(k, lo, hi); }, spec_.kind);
    return swapped ? Assignment({f_hi, f_lo}) : Assignment({f_lo, f_hi});
  }

 private:
  using Outcome = std::pair<FacilityIndex, FacilityIndex>;

  static Outcome both(FacilityIndex j) { return {j, j}; }

  static void check_facility(FacilityIndex j) {
    if (j > 1) throw PreconditionError("facility choice must be 1 or 2");
  }

  void check(const TypeI& k) const {
    require_two_facilities(env_);
    check_facility(k.target);
  }
  void check(const TypeII&) const {
    if (!admits_type_ii(env_params(env_))) throw PreconditionError("type2 requires M = 0");
  }
  void check(const TypeIII&) const {
    if (!admits_type_iii(env_params(env_))) throw PreconditionError("type3 requires M = delta");
  }
  void check(const TypeIV& k) const {
    if (!admits_type_iv_v(env_params(env_))) throw PreconditionError("type4 requires 0 < M < delta");
    check_facility(k.boundary_choice);
  }
  void check(const TypeV& k) const {
    if (!admits_type_iv_v(env_params(env_))) throw PreconditionError("type5 requires 0 < M < delta");
    check_facility(k.boundary_choice);
  }
  void check(const KRank& k) const {
    if (k.k < 1) throw PreconditionError("k-rank needs k >= 1");
  }

  [[nodiscard]] std::optional<double> star(const TypeI& k) const { return k.target == 0 ? kInf : -kInf; }
  [[nodiscard]] std::optional<double> star(const TypeII& k) const {
    return std::min(k.diagonal.threshold, env_.location(0));
  }
  [[nodiscard]] std::optional<double> star(const TypeIII& k) const {
    return std::max(k.diagonal.threshold, env_.location(1));
  }
  [[nodiscard]] std::optional<double> star(const TypeIV&) const { return boundary(); }
  [[nodiscard]] std::optional<double> star(const TypeV&) const { return boundary(); }
  [[nodiscard]] std::optional<double> star(const KRank&) const { return std::nullopt; }

  [[nodiscard]] double boundary() const { return env_params(env_).M + env_.location(0); }

  [[nodiscard]] Outcome pair_outcome(const TypeI& k, double, double) const { return both(k.target); }

  [[nodiscard]] Outcome pair_outcome(const TypeII& k, double x1, double) const {
    if (x1 <= env_.location(0)) return both(k.diagonal.at(x1));
    return both(1);
  }

  [[nodiscard]] Outcome pair_outcome(const TypeIII& k, double x1, double x2) const {
    if (x2 < env_.location(1)) return both(0);
    // x1 < x2 with x2 >= l_2 falls back to the diagonal at x1.
    if (x1 < env_.location(1)) return both(0);
    return both(k.diagonal.at(x1));
  }

  [[nodiscard]] Outcome pair_outcome(const TypeIV& k, double x1, double) const {
    const double t = boundary();
    if (x1 < t) return both(0);
    if (x1 > t) return both(1);
    return both(k.boundary_choice);
  }

  [[nodiscard]] Outcome pair_outcome(const TypeV& k, double, double x2) const {
    const double t = boundary();
    if (x2 < t) return both(0);
    if (x2 > t) return both(1);
    return both(k.boundary_choice);
  }

  [[nodiscard]] Outcome pair_outcome(const KRank&, double, double) const { return both(0); }

  MechanismSpec spec_;
  Environment env_;
};

/// apply_mechanism: validate the spec against `env` and run it on `x`.
[[nodiscard]] inline Assignment apply_mechanism(const MechanismSpec& spec, const Profile& x,
                                                const Environment& env) {
  return Mechanism(spec, env)(x);
}

/// Every Type I-V spec the environment admits, with each "or" resolved both
/// ways. Types II and III additionally get one threshold diagonal per entry
/// of `diagonal_thresholds` (inclusive and exclusive).
[[nodiscard]] inline std::vector<MechanismSpec> constructible_specs(
    const Environment& env, std::span<const double> diagonal_thresholds = {}) {
  const EnvParams p = env_params(env);
  std::vector<MechanismSpec> specs{{TypeI{0}}, {TypeI{1}}};
  std::vector<DiagonalRule> diagonals{DiagonalRule::facility1(), DiagonalRule::facility2()};
  for (double t : diagonal_thresholds) {
    diagonals.push_back({t, false});
    diagonals.push_back({t, true});
  }
  if (admits_type_ii(p)) {
    for (const auto& d : diagonals) specs.push_back({TypeII{d}});
  }
  if (admits_type_iii(p)) {
    for (const auto& d : diagonals) specs.push_back({TypeIII{d}});
  }
  if (admits_type_iv_v(p)) {
    for (FacilityIndex j : {FacilityIndex{0}, FacilityIndex{1}}) {
      specs.push_back({TypeIV{j}});
      specs.push_back({TypeV{j}});
    }
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Approximation lower bound

/// The two-facility environment ((eps, eps), (0, 1/eps - eps)).
[[nodiscard]] inline Environment epsilon_environment(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  return Environment({0.0, 1.0 / eps - eps}, {eps, eps});
}

/// Best approximation ratio any strategyproof anonymous two-agent mechanism
/// can reach on `env`:
///   max{ (min b + delta) / (b1 + b2), (min b + delta + M) / (max b + M) }.
[[nodiscard]] inline double ratio_lower_bound(const Environment& env) {
  const EnvParams p = env_params(env);
  if (!admits_type_iv_v(p)) throw PreconditionError("ratio lower bound requires 0 < M < delta");
  const double b1 = env.building_cost(0);
  const double b2 = env.building_cost(1);
  const double lo = std::min(b1, b2);
  const double hi = std::max(b1, b2);
  return std::max((lo + p.delta) / (b1 + b2), (lo + p.delta + p.M) / (hi + p.M));
}

}  // namespace fagfcs
