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
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fagfcs {

/// Raised when input data violates a domain invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an instance or mechanism document cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a mechanism is paired with an environment it is not defined on.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using FacilityIndex = std::size_t;
using AgentIndex = std::size_t;

/// Facility configuration: locations and strictly positive building costs.
///
/// Facilities are kept sorted by location (ties by building cost, then by
/// input order). `input_index(j)` maps a sorted facility back to the
/// position it had in the caller's input.
class Environment {
 public:
  Environment(std::vector<double> locations, std::vector<double> building_costs) {
    if (locations.size() != building_costs.size()) {
      throw ValidationError("facility locations and building costs differ in length");
    }
    if (locations.empty()) {
      throw ValidationError("environment needs at least one facility");
    }
    for (std::size_t j = 0; j < locations.size(); ++j) {
      if (!std::isfinite(locations[j])) {
        throw ValidationError("facility location must be finite");
      }
      if (!std::isfinite(building_costs[j])) {
        throw ValidationError("building cost must be finite");
      }
      if (!(building_costs[j] > 0.0)) {
        throw ValidationError("building cost must be > 0");
      }
    }

    order_.resize(locations.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      if (locations[a] != locations[b]) return locations[a] < locations[b];
      return building_costs[a] < building_costs[b];
    });

    locations_.reserve(order_.size());
    costs_.reserve(order_.size());
    for (std::size_t idx : order_) {
      locations_.push_back(locations[idx]);
      costs_.push_back(building_costs[idx]);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return locations_.size(); }
  [[nodiscard]] std::span<const double> locations() const noexcept { return locations_; }
  [[nodiscard]] std::span<const double> building_costs() const noexcept { return costs_; }
  [[nodiscard]] double location(FacilityIndex j) const { return locations_.at(j); }
  [[nodiscard]] double building_cost(FacilityIndex j) const { return costs_.at(j); }

  /// Input position of sorted facility `j`.
  [[nodiscard]] std::size_t input_index(FacilityIndex j) const { return order_.at(j); }
  [[nodiscard]] std::span<const std::size_t> input_order() const noexcept { return order_; }

  /// Distance between the two facilities of a two-facility environment.
  [[nodiscard]] double delta() const {
    if (size() < 2) throw ValidationError("delta needs at least two facilities");
    return locations_[1] - locations_[0];
  }

  /// Same facilities, input order forgotten (permutation reset to identity).
  [[nodiscard]] Environment normalized() const { return Environment(locations_, costs_); }

  friend bool operator==(const Environment& a, const Environment& b) {
    return a.locations_ == b.locations_ && a.costs_ == b.costs_;
  }

 private:
  std::vector<double> locations_;
  std::vector<double> costs_;
  std::vector<std::size_t> order_;
};

/// Reported agent positions, in the caller's agent order.
class Profile {
 public:
  explicit Profile(std::vector<double> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) throw ValidationError("profile needs at least one agent");
    for (double x : positions_) {
      if (!std::isfinite(x)) throw ValidationError("agent position must be finite");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
  [[nodiscard]] std::span<const double> positions() const noexcept { return positions_; }
  [[nodiscard]] double operator[](AgentIndex i) const { return positions_[i]; }
  [[nodiscard]] double at(AgentIndex i) const { return positions_.at(i); }

  /// Copy with agent `i` reporting `x` instead.
  [[nodiscard]] Profile with_position(AgentIndex i, double x) const {
    std::vector<double> p = positions_;
    p.at(i) = x;
    return Profile(std::move(p));
  }

  friend bool operator==(const Profile&, const Profile&) = default;

 private:
  std::vector<double> positions_;
};

/// Agent indices ordered by ascending position; ties keep input order.
[[nodiscard]] inline std::vector<AgentIndex> sorted_agent_order(const Profile& profile) {
  std::vector<AgentIndex> order(profile.size());
  std::iota(order.begin(), order.end(), AgentIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](AgentIndex a, AgentIndex b) { return profile[a] < profile[b]; });
  return order;
}

/// One facility per agent (a strategy profile or a mechanism outcome).
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::vector<FacilityIndex> choices) : choices_(std::move(choices)) {}

  [[nodiscard]] std::size_t size() const noexcept { return choices_.size(); }
  [[nodiscard]] std::span<const FacilityIndex> choices() const noexcept { return choices_; }
  [[nodiscard]] FacilityIndex operator[](AgentIndex i) const { return choices_[i]; }
  [[nodiscard]] FacilityIndex at(AgentIndex i) const { return choices_.at(i); }

  [[nodiscard]] Assignment with_choice(AgentIndex i, FacilityIndex j) const {
    std::vector<FacilityIndex> c = choices_;
    c.at(i) = j;
    return Assignment(std::move(c));
  }

  /// Every agent at facility `j`.
  [[nodiscard]] static Assignment uniform(std::size_t n, FacilityIndex j) {
    return Assignment(std::vector<FacilityIndex>(n, j));
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<FacilityIndex> choices_;
};

inline void validate(const Assignment& s, const Profile& x, const Environment& env) {
  if (s.size() != x.size()) {
    throw ValidationError("assignment length must equal the number of agents");
  }
  for (FacilityIndex j : s.choices()) {
    if (j >= env.size()) throw ValidationError("assignment refers to an unknown facility");
  }
}

/// n_j(s): number of agents at each facility.
[[nodiscard]] inline std::vector<std::size_t> facility_loads(const Assignment& s, std::size_t m) {
  std::vector<std::size_t> loads(m, 0);
  for (FacilityIndex j : s.choices()) ++loads.at(j);
  return loads;
}

/// F_s: facilities used by at least one agent, ascending.
[[nodiscard]] inline std::vector<FacilityIndex> used_facilities(const Assignment& s, std::size_t m) {
  const auto loads = facility_loads(s, m);
  std::vector<FacilityIndex> used;
  for (FacilityIndex j = 0; j < m; ++j) {
    if (loads[j] > 0) used.push_back(j);
  }
  return used;
}

/// A_j(s): agents choosing facility `j`, ascending by agent index.
[[nodiscard]] inline std::vector<AgentIndex> agents_at(const Assignment& s, FacilityIndex j) {
  std::vector<AgentIndex> agents;
  for (AgentIndex i = 0; i < s.size(); ++i) {
    if (s[i] == j) agents.push_back(i);
  }
  return agents;
}

struct Instance {
  Environment environment;
  Profile profile;
  std::optional<std::string> name;

  [[nodiscard]] std::size_t agent_count() const noexcept { return profile.size(); }
  [[nodiscard]] std::size_t facility_count() const noexcept { return environment.size(); }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.environment == b.environment && a.profile == b.profile && a.name == b.name;
  }
};

/// Bounds for random instance generation. The defaults are an arbitrary
/// desk-scale choice: positions in [0, 100], building costs in [1, 50].
struct GeneratorRanges {
  double position_min = 0.0;
  double position_max = 100.0;
  double cost_min = 1.0;
  double cost_max = 50.0;
};

/// Uniform double in [lo, hi) from the top 53 bits of a 64-bit draw.
/// Spelled out so generated files do not depend on the standard library's
/// distribution implementation.
[[nodiscard]] inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

/// Uniform integer in [lo, hi].
[[nodiscard]] inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::size_t>(rng() % span);
}

[[nodiscard]] inline Instance generate_instance(std::size_t n, std::size_t m, std::uint64_t seed,
                                                const GeneratorRanges& ranges = {}) {
  if (n < 1) throw ValidationError("n must be ≥ 1");
  if (m < 1) throw ValidationError("m must be ≥ 1");
  const bool finite = std::isfinite(ranges.position_min) && std::isfinite(ranges.position_max) &&
                      std::isfinite(ranges.cost_min) && std::isfinite(ranges.cost_max);
  if (!finite) throw ValidationError("generator bounds must be finite");
  if (ranges.position_min > ranges.position_max) {
    throw ValidationError("position lower bound exceeds upper bound");
  }
  if (!(ranges.cost_min > 0.0)) throw ValidationError("cost lower bound must be > 0");
  if (ranges.cost_min > ranges.cost_max) {
    throw ValidationError("cost lower bound exceeds upper bound");
  }

  std::mt19937_64 rng(seed);
  std::vector<double> locations(m), costs(m), positions(n);
  for (std::size_t j = 0; j < m; ++j) {
    locations[j] = uniform_real(rng, ranges.position_min, ranges.position_max);
    costs[j] = uniform_real(rng, ranges.cost_min, ranges.cost_max);
  }
  for (double& x : positions) x = uniform_real(rng, ranges.position_min, ranges.position_max);

  return Instance{Environment(std::move(locations), std::move(costs)), Profile(std::move(positions)),
                  std::nullopt};
}

}  // namespace fagfcs
