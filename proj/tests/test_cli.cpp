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

// Drives the command-line front end in process and re-parses its output.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"
#include "oracles.hpp"

namespace fagfcs {
namespace {

namespace fs = std::filesystem;

const std::string kSamples = FAGFCS_SAMPLES_DIR;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;

  [[nodiscard]] json doc() const { return json::parse(out); }
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "fagfcs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("fagfcs_cli_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

// Facility numbers printed by the CLI are 1-based in the file's order.
Assignment from_cli(const json& facilities, const Environment& env) {
  std::vector<FacilityIndex> c;
  for (const auto& f : facilities) {
    const auto want = f.get<std::size_t>();
    for (FacilityIndex j = 0; j < env.size(); ++j) {
      if (env.input_index(j) + 1 == want) c.push_back(j);
    }
  }
  return Assignment(std::move(c));
}

TEST(CliGen, WritesTheGeneratedInstance) {
  const CliRun r = run({"gen", "-n", "4", "-m", "2", "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(instance_from_json(r.doc()), generate_instance(4, 2, 42));
}

TEST(CliGen, SameFlagsByteIdenticalFiles) {
  TempDir dir;
  ASSERT_EQ(run({"gen", "-n", "4", "-m", "2", "--seed", "42", "-o", dir.file("a.json")}).code, 0);
  ASSERT_EQ(run({"gen", "-n", "4", "-m", "2", "--seed", "42", "-o", dir.file("b.json")}).code, 0);
  EXPECT_FALSE(slurp(dir.file("a.json")).empty());
  EXPECT_EQ(slurp(dir.file("a.json")), slurp(dir.file("b.json")));
  EXPECT_NO_THROW((void)load_instance(dir.file("a.json")));
}

TEST(CliGen, ValidationErrors) {
  const CliRun zero = run({"gen", "-n", "0", "-m", "2", "--seed", "1"});
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.err.find("n must be ≥ 1"), std::string::npos);
  EXPECT_EQ(run({"gen", "-n", "3", "-m", "2"}).code, 2);  // seed is mandatory
  EXPECT_EQ(run({"gen", "-n", "3", "-m", "2", "--seed", "1", "--cost-min", "0"}).code, 2);
  EXPECT_EQ(run({"gen", "-n", "3", "-m", "2", "--seed", "1", "-o", "/no/such/dir/x.json"}).code, 1);
}

TEST(CliSolve, RunningInstanceBoth) {
  const CliRun r = run({"solve", kSamples + "/running.json", "--mode", "both", "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json d = r.doc();
  EXPECT_EQ(d["command"], "solve");
  EXPECT_EQ(d["instance_name"], "running");
  const json& o = d["outputs"];
  EXPECT_EQ(o["pne"]["assignment"], json::array({1, 1}));
  EXPECT_DOUBLE_EQ(o["pne"]["potential"].get<double>(), 6.0);
  EXPECT_TRUE(o["pne"]["is_pne"].get<bool>());
  EXPECT_TRUE(o["pne"]["oracle_match"].get<bool>());
  EXPECT_DOUBLE_EQ(o["opt"]["social_cost"].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(o["ratio"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(o["harmonic_bound"].get<double>(), 1.5);
  EXPECT_TRUE(o["holds"].get<bool>());
  EXPECT_GE(d["elapsed_ms"].get<double>(), 0.0);
}

TEST(CliSolve, NumbersMatchLibraryRecomputation) {
  TempDir dir;
  std::vector<std::string> args{"solve", "--mode", "both", "--verify", "--jobs", "2"};
  std::vector<Instance> insts;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::string path = dir.file("i" + std::to_string(seed) + ".json");
    ASSERT_EQ(run({"gen", "-n", std::to_string(1 + seed % 6), "-m", std::to_string(1 + seed % 4), "--seed",
                   std::to_string(seed), "-o", path})
                  .code,
              0);
    insts.push_back(load_instance(path));
    args.push_back(path);
  }
  const CliRun r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const json d = r.doc();
  ASSERT_TRUE(d.is_array());
  ASSERT_EQ(d.size(), insts.size());
  for (std::size_t t = 0; t < insts.size(); ++t) {
    const Instance& inst = insts[t];
    const json& o = d[t]["outputs"];
    const Assignment pne = from_cli(o["pne"]["assignment"], inst.environment);
    const Assignment opt = from_cli(o["opt"]["assignment"], inst.environment);
    EXPECT_TRUE(oracle::rel_eq(o["pne"]["social_cost"], social_cost(inst.profile, pne, inst.environment).social_cost));
    EXPECT_TRUE(oracle::rel_eq(o["pne"]["potential"], potential(inst.profile, pne, inst.environment)));
    EXPECT_TRUE(oracle::rel_eq(o["opt"]["social_cost"], social_cost(inst.profile, opt, inst.environment).social_cost));
    EXPECT_TRUE(oracle::rel_eq(o["opt"]["social_cost"], optimal_brute_force(inst).social_cost));
    EXPECT_TRUE(oracle::rel_eq(o["harmonic_bound"], harmonic(inst.agent_count())));
    EXPECT_TRUE(o["pne"]["oracle_match"].get<bool>());
    EXPECT_TRUE(o["opt"]["oracle_match"].get<bool>());
  }
}

TEST(CliSolve, ErrorsMapToExitCodes) {
  TempDir dir;
  EXPECT_EQ(run({"solve", dir.file("missing.json")}).code, 1);
  write_text_file(dir.file("bad.json"), "{\"facilities\": [");
  EXPECT_EQ(run({"solve", dir.file("bad.json")}).code, 2);
  write_text_file(dir.file("zero.json"),
                  R"({"facilities":[{"location":0,"building_cost":0}],"agents":[1]})");
  EXPECT_EQ(run({"solve", dir.file("zero.json")}).code, 2);
  EXPECT_EQ(run({"solve", kSamples + "/running.json", "--mode", "fast"}).code, 2);
  EXPECT_EQ(run({"solve"}).code, 2);
}

TEST(CliSolve, LargeInstanceSkipsOracleWithWarning) {
  TempDir dir;
  ASSERT_EQ(run({"gen", "-n", "30", "-m", "3", "--seed", "3", "-o", dir.file("big.json")}).code, 0);
  const CliRun r = run({"solve", dir.file("big.json"), "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json o = r.doc()["outputs"];
  EXPECT_TRUE(o["pne"]["is_pne"].get<bool>());
  EXPECT_FALSE(o["pne"].contains("oracle_match"));
  EXPECT_EQ(o["warnings"].size(), 2u);
}

TEST(CliDynamics, AllOnesConvergesWithDecreasingPotential) {
  const CliRun r = run({"dynamics", kSamples + "/running.json", "--start", "all-2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json o = r.doc()["outputs"];
  EXPECT_TRUE(o["converged"].get<bool>());
  double prev = o["initial_potential"].get<double>();
  for (const auto& step : o["steps"]) {
    EXPECT_LT(step["potential_after"].get<double>(), prev);
    prev = step["potential_after"].get<double>();
  }
  const Instance inst = load_instance(kSamples + "/running.json");
  const Assignment fin = from_cli(o["final_assignment"], inst.environment);
  EXPECT_TRUE(is_pne(inst.profile, fin, inst.environment));
  EXPECT_TRUE(oracle::rel_eq(o["final_potential"], potential(inst.profile, fin, inst.environment)));

  const CliRun all1 = run({"dynamics", kSamples + "/running.json", "--start", "all-1"});
  ASSERT_EQ(all1.code, 0);
  EXPECT_EQ(all1.doc()["outputs"]["summary"]["steps"], 0);  // (1,1) is already an equilibrium
}

TEST(CliDynamics, StartFileBudgetAndOrders) {
  const std::string inst = kSamples + "/running.json";
  const std::string start = "file:" + kSamples + "/start_2_1.json";
  const CliRun budget = run({"dynamics", inst, "--start", start, "--max-steps", "0"});
  ASSERT_EQ(budget.code, 0) << budget.err;
  EXPECT_FALSE(budget.doc()["outputs"]["converged"].get<bool>());
  EXPECT_TRUE(budget.doc()["outputs"]["steps"].empty());

  const CliRun one = run({"dynamics", inst, "--start", start, "--order", "max-gain"});
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.doc()["outputs"]["summary"]["steps"], 1);
  EXPECT_EQ(one.doc()["outputs"]["final_assignment"], json::array({1, 1}));

  EXPECT_EQ(run({"dynamics", inst, "--order", "seeded-random"}).code, 2);
  EXPECT_EQ(run({"dynamics", inst, "--order", "seeded-random", "--seed", "4", "--start", "random:9"}).code, 0);
  EXPECT_EQ(run({"dynamics", inst, "--start", "all-7"}).code, 2);
  EXPECT_EQ(run({"dynamics", inst, "--start", "sideways"}).code, 2);
  EXPECT_EQ(run({"dynamics", inst, "--order", "sideways"}).code, 2);
}

TEST(CliDynamics, TraceToFileSummaryToStdout) {
  TempDir dir;
  const CliRun r = run({"dynamics", kSamples + "/running.json", "--start", "all-2", "-o", dir.file("trace.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = r.doc();
  EXPECT_TRUE(summary["converged"].get<bool>());
  const json trace = json::parse(slurp(dir.file("trace.json")));
  EXPECT_EQ(trace["outputs"]["summary"], summary);
}

TEST(CliMech, KRankOnRunningInstance) {
  const CliRun r = run({"mech", kSamples + "/running.json", "--mech", R"({"kind":"krank","params":{"k":1}})"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json o = r.doc()["outputs"];
  EXPECT_EQ(o["assignment"], json::array({1, 1}));
  EXPECT_DOUBLE_EQ(o["social_cost"].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(o["env_params"]["M"].get<double>(), 2.0);
  EXPECT_EQ(o["classification"]["row"], 5);
  EXPECT_EQ(o["classification"]["constructible"], json::array({"type1", "type4", "type5"}));

  const CliRun from_file = run({"mech", kSamples + "/running.json"});  // uses the instance's own spec
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.doc()["outputs"]["assignment"], json::array({1, 1}));
}

TEST(CliMech, AuditsPassForKRank) {
  for (const char* k : {"1", "2"}) {
    const CliRun r = run({"mech", kSamples + "/running.json", "--mech",
                       std::string(R"({"kind":"krank","params":{"k":)") + k + "}}", "--audit",
                       "sp,anon,unanimous,lemma", "--grid", "fine"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json a = r.doc()["outputs"]["audits"];
    EXPECT_TRUE(a["strategyproof"]["passed"].get<bool>());
    EXPECT_TRUE(a["anonymous"]["passed"].get<bool>());
    EXPECT_TRUE(a["unanimous"]["passed"].get<bool>());
    EXPECT_GT(a["strategyproof"]["checks"].get<std::size_t>(), 0u);
  }
}

TEST(CliMech, TypeFourOnEpsilonEnvironment) {
  const CliRun r = run({"mech", kSamples + "/epsilon_0.1.json", "--audit", "ratio,sp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json o = r.doc()["outputs"];
  EXPECT_EQ(o["assignment"], json::array({1, 1}));
  EXPECT_NEAR(o["x_star"].get<double>(), 4.95, 1e-12);
  EXPECT_GE(o["audits"]["empirical_ratio"]["worst_ratio"].get<double>(), 49.0);
  EXPECT_TRUE(o["audits"]["strategyproof"]["passed"].get<bool>());
}

TEST(CliMech, ErrorsMapToExitCodes) {
  TempDir dir;
  write_text_file(dir.file("m0.json"),
                  R"({"facilities":[{"location":0,"building_cost":4},{"location":1,"building_cost":2}],"agents":[0,1]})");
  EXPECT_EQ(run({"mech", dir.file("m0.json"), "--mech", R"({"kind":"type4","params":{"boundary_choice":1}})"}).code, 3);
  EXPECT_EQ(run({"mech", dir.file("m0.json"), "--mech", R"({"kind":"type2"})"}).code, 0);
  EXPECT_EQ(run({"mech", dir.file("m0.json")}).code, 2);  // no spec anywhere
  EXPECT_EQ(run({"mech", dir.file("m0.json"), "--mech", R"({"kind":"nope"})"}).code, 2);
  EXPECT_EQ(run({"mech", dir.file("m0.json"), "--mech", R"({"kind":"krank","params":{"k":3}})"}).code, 3);
  EXPECT_EQ(run({"mech", dir.file("m0.json"), "--mech", dir.file("absent.json")}).code, 1);
  EXPECT_EQ(run({"mech", kSamples + "/running.json", "--audit", "vibes"}).code, 2);
}

TEST(CliRatio, DefaultEpsilons) {
  const CliRun r = run({"ratio"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rows = r.doc()["outputs"]["rows"];
  ASSERT_EQ(rows.size(), 4u);
  const std::vector<double> eps{0.5, 0.2, 0.1, 0.05};
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const double e = eps[t];
    EXPECT_DOUBLE_EQ(rows[t]["epsilon"].get<double>(), e);
    EXPECT_TRUE(oracle::rel_eq(rows[t]["ratio_lower_bound"], ratio_lower_bound(epsilon_environment(e))));
    EXPECT_TRUE(oracle::rel_eq(rows[t]["inverse_two_eps_sq"], 1 / (2 * e * e)));
    const auto o = oracle::lmr(0, e, 1 / e - e, e);
    EXPECT_TRUE(oracle::rel_eq(rows[t]["M"], o.M));
  }
  EXPECT_NEAR(rows[2]["ratio_lower_bound"].get<double>(), 50.0, 1e-9);
  EXPECT_TRUE(rows[2]["equal"].get<bool>());
}

TEST(CliRatio, RangeChecks) {
  EXPECT_EQ(run({"ratio", "--epsilon", "1.5"}).code, 2);
  EXPECT_EQ(run({"ratio", "--epsilon", "0"}).code, 2);
  const CliRun r = run({"ratio", "--epsilon", "0.1,0.05"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.doc()["outputs"]["rows"].size(), 2u);
}

TEST(Cli, HelpAndUnknownCommands) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"teleport"}).code, 2);
}

}  // namespace
}  // namespace fagfcs
