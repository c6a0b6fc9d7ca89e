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

#include <gtest/gtest.h>

#include "fagfcs/costs.hpp"
#include "oracles.hpp"

namespace fagfcs {
namespace {

// l = (0, 3), b = (2, 4), x = (0, 3).
const Environment kEnv({0.0, 3.0}, {2.0, 4.0});
const Profile kX({0.0, 3.0});

TEST(Harmonic, Values) {
  EXPECT_DOUBLE_EQ(harmonic(0), 0.0);
  EXPECT_DOUBLE_EQ(harmonic(1), 1.0);
  EXPECT_DOUBLE_EQ(harmonic(2), 1.5);
  EXPECT_DOUBLE_EQ(harmonic(4), 25.0 / 12.0);
  const auto h = harmonic_table(4);
  ASSERT_EQ(h.size(), 5u);
  EXPECT_DOUBLE_EQ(h[3], 11.0 / 6.0);
}

TEST(AgentCost, HandComputed) {
  EXPECT_DOUBLE_EQ(agent_cost(1, kX, Assignment({0, 0}), kEnv), 4.0);
  EXPECT_DOUBLE_EQ(agent_cost(0, kX, Assignment({0, 1}), kEnv), 2.0);
  EXPECT_DOUBLE_EQ(agent_cost(0, Profile({5.0}), Assignment({0}), Environment({5.0}, {1.0})), 1.0);
  EXPECT_THROW((void)agent_cost(2, kX, Assignment({0, 0}), kEnv), ValidationError);
}

TEST(SocialCost, HandComputed) {
  EXPECT_DOUBLE_EQ(social_cost(kX, Assignment({0, 0}), kEnv).social_cost, 5.0);
  EXPECT_DOUBLE_EQ(social_cost(kX, Assignment({0, 1}), kEnv).social_cost, 6.0);
  EXPECT_DOUBLE_EQ(social_cost(kX, Assignment({1, 0}), kEnv).social_cost, 12.0);
  const auto br = social_cost(kX, Assignment({0, 0}), kEnv);
  ASSERT_EQ(br.per_agent.size(), 2u);
  EXPECT_DOUBLE_EQ(br.per_agent[0].distance, 0.0);
  EXPECT_DOUBLE_EQ(br.per_agent[0].share, 1.0);
  EXPECT_DOUBLE_EQ(br.per_agent[1].total, 4.0);
}

TEST(SocialCost, FacilityFormMatches) {
  for (const auto& s : {Assignment({0, 0}), Assignment({0, 1}), Assignment({1, 0}), Assignment({1, 1})}) {
    EXPECT_NEAR(social_cost_by_facility(kX, s, kEnv), social_cost(kX, s, kEnv).social_cost, 1e-12);
  }
}

TEST(Potential, HandComputed) {
  EXPECT_DOUBLE_EQ(potential(kX, Assignment({0, 0}), kEnv), 6.0);
  EXPECT_DOUBLE_EQ(potential(kX, Assignment({0, 1}), kEnv), 6.0);
  EXPECT_DOUBLE_EQ(potential(kX, Assignment({1, 0}), kEnv), 12.0);
  EXPECT_DOUBLE_EQ(potential_by_facility(kX, Assignment({1, 0}), kEnv), 12.0);
}

TEST(DeviationCost, CountsTheMoverOnce) {
  const Assignment s({0, 0});
  const auto loads = facility_loads(s, 2);
  EXPECT_DOUBLE_EQ(deviation_cost(1, 1, kX, s, kEnv, loads), 4.0);  // 0 + 4/1
  EXPECT_DOUBLE_EQ(deviation_cost(1, 0, kX, s, kEnv, loads), 4.0);  // stays: 3 + 2/2
}

TEST(BlockCost, HandComputed) {
  const std::vector<double> sorted{0.0, 3.0};
  EXPECT_DOUBLE_EQ(block_cost(0, 1, 0, sorted, kEnv), 6.0);
  EXPECT_DOUBLE_EQ(block_cost(1, 1, 1, sorted, kEnv), 4.0);
  const std::vector<double> one{5.0};
  EXPECT_DOUBLE_EQ(block_cost(0, 0, 0, one, Environment({5.0}, {1.0})), 1.0);
  EXPECT_THROW((void)block_cost(1, 0, 0, sorted, kEnv), ValidationError);
}

TEST(BlockDistances, MatchesDirectSums) {
  const Environment env({-1.0, 2.5, 7.0}, {1.0, 1.0, 1.0});
  const std::vector<double> sorted{-3.0, -1.0, 0.0, 2.5, 4.0, 9.0};
  const BlockDistances d(sorted, env);
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a; b < sorted.size(); ++b) {
      for (FacilityIndex f = 0; f < env.size(); ++f) {
        double want = 0;
        for (std::size_t t = a; t <= b; ++t) want += std::abs(sorted[t] - env.location(f));
        EXPECT_NEAR(d.distance(a, b, f), want, 1e-12);
      }
    }
  }
}

TEST(Potential, AgreesWithOracleOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Instance inst = generate_instance(1 + seed % 6, 1 + seed % 4, seed);
    const oracle::Env oe{{inst.environment.locations().begin(), inst.environment.locations().end()},
                         {inst.environment.building_costs().begin(), inst.environment.building_costs().end()}};
    const std::vector<double> x(inst.profile.positions().begin(), inst.profile.positions().end());
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> c(x.size());
    for (auto& v : c) v = uniform_index(rng, 0, inst.facility_count() - 1);
    const Assignment s(c);
    EXPECT_NEAR(potential(inst.profile, s, inst.environment), oracle::phi(oe, x, c), 1e-9);
    EXPECT_NEAR(social_cost(inst.profile, s, inst.environment).social_cost, oracle::sc(oe, x, c), 1e-9);
  }
}

}  // namespace
}  // namespace fagfcs
