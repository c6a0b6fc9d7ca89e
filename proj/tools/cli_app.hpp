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

// Command implementations for the `fagfcs` tool. Exit codes:
//   0 success, 1 I/O, 2 validation, 3 mechanism precondition.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fagfcs/fagfcs.hpp"

namespace fagfcs::cli {

enum ExitCode : int { kOk = 0, kIo = 1, kValidation = 2, kPrecondition = 3 };

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

inline json run_result(const std::string& command, const Instance* inst, json outputs, double ms) {
  return json{{"command", command},
              {"instance_name", inst && inst->name ? *inst->name : std::string()},
              {"outputs", std::move(outputs)},
              {"elapsed_ms", ms}};
}

inline json assignment_json(const Assignment& s, const Environment& env) {
  return facilities_in_input_order(s, env);
}

inline void emit(const json& doc, const std::string& out_path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

/// Minimum potential over all assignments; empty when m^n exceeds the guard.
inline std::optional<double> brute_force_min_potential(const Instance& inst) {
  if (assignment_space_size(inst.agent_count(), inst.facility_count()) > kBruteForceLimit) {
    return std::nullopt;
  }
  double best = kInf;
  for_each_assignment(inst.agent_count(), inst.facility_count(), [&](const Assignment& s) {
    best = std::min(best, potential(inst.profile, s, inst.environment));
  });
  return best;
}

inline bool relative_equal(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline json audit_json(const AuditReport& r, const Environment& env) {
  json cxs = json::array();
  for (const auto& c : r.counterexamples) {
    json cj{{"profile", c.profile}, {"cost_before", c.cost_before}, {"cost_after", c.cost_after}};
    if (c.agent) cj["agent"] = *c.agent + 1;
    if (c.misreport) cj["misreport"] = *c.misreport;
    if (!c.permutation.empty()) {
      std::vector<std::size_t> p;
      for (auto v : c.permutation) p.push_back(v + 1);
      cj["permutation"] = p;
    }
    cj["outcome"] = assignment_json(Assignment(c.outcome), env);
    cj["other_outcome"] = assignment_json(Assignment(c.other_outcome), env);
    cxs.push_back(std::move(cj));
  }
  return json{{"property", std::string(to_string(r.property))},
              {"passed", r.passed},
              {"checks", r.checks},
              {"violations", r.violations},
              {"counterexamples", std::move(cxs)}};
}

inline json lemma_json(const LemmaReport& rep) {
  json props = json::object();
  for (const auto& p : rep.properties) {
    json pj{{"holds", p.holds()}, {"checks", p.checks}, {"violations", p.violations}};
    if (p.witness_profile) pj["witness_profile"] = *p.witness_profile;
    if (p.witness_other) pj["witness_other"] = *p.witness_other;
    props[p.name] = std::move(pj);
  }
  return json{{"all_hold", rep.all_hold()}, {"properties", std::move(props)}};
}

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

inline GridOptions grid_options(const std::string& density) {
  if (density == "coarse") return GridOptions{false, 1e-3, false, true};
  if (density == "standard") return GridOptions{true, 1e-3, false, true};
  if (density == "fine") return GridOptions{};
  throw ValidationError("grid density must be coarse, standard or fine");
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct GenArgs {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string name;
  GeneratorRanges ranges;
};

inline int cmd_gen(const GenArgs& a, std::ostream& out) {
  Instance inst = generate_instance(a.n, a.m, a.seed, a.ranges);
  if (!a.name.empty()) inst.name = a.name;
  const std::string text = instance_to_json(inst).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text_file(a.out, text);
  }
  return kOk;
}

struct SolveArgs {
  std::vector<std::string> inputs;
  std::string mode = "both";
  bool verify = false;
  std::size_t jobs = 1;
  std::string out;
};

inline json solve_one(const std::string& path, const SolveArgs& a, bool& verified_ok) {
  const auto start = detail::Clock::now();
  const Instance inst = load_instance(path);
  const Environment& env = inst.environment;
  json outputs = json::object();
  json warnings = json::array();
  std::optional<Assignment> pne;
  std::optional<OptResult> opt;

  if (a.mode == "pne" || a.mode == "both") {
    const auto sol = solve_pne_dp(inst);
    pne = sol.assignment;
    const auto costs = social_cost(inst.profile, *pne, env);
    json pj{{"assignment", detail::assignment_json(*pne, env)},
            {"social_cost", costs.social_cost},
            {"potential", potential(inst.profile, *pne, env)}};
    if (a.verify) {
      const bool eq = static_cast<bool>(is_pne(inst.profile, *pne, env));
      pj["is_pne"] = eq;
      verified_ok = verified_ok && eq;
      if (const auto best = detail::brute_force_min_potential(inst)) {
        const bool match = detail::relative_equal(*best, sol.potential);
        pj["oracle_min_potential"] = *best;
        pj["oracle_match"] = match;
        verified_ok = verified_ok && match;
      } else {
        warnings.push_back("potential oracle skipped: m^n exceeds 10^7; only the equilibrium check ran");
      }
    }
    outputs["pne"] = std::move(pj);
  }

  if (a.mode == "opt" || a.mode == "both") {
    opt = optimal_block_dp(inst);
    json oj{{"assignment", detail::assignment_json(opt->assignment, env)},
            {"social_cost", opt->social_cost},
            {"potential", potential(inst.profile, opt->assignment, env)},
            {"method", std::string(to_string(opt->method))}};
    if (a.verify) {
      if (assignment_space_size(inst.agent_count(), inst.facility_count()) <= kBruteForceLimit) {
        const auto bf = optimal_brute_force(inst);
        const bool match = detail::relative_equal(bf.social_cost, opt->social_cost);
        oj["oracle_social_cost"] = bf.social_cost;
        oj["oracle_match"] = match;
        verified_ok = verified_ok && match;
      } else {
        warnings.push_back("social-cost oracle skipped: m^n exceeds 10^7");
      }
    }
    outputs["opt"] = std::move(oj);
  }

  if (pne && opt) {
    const auto hb = check_harmonic_bound(inst, *pne, opt->assignment);
    outputs["ratio"] = hb.ratio;
    outputs["harmonic_bound"] = hb.bound;
    outputs["holds"] = hb.holds;
    outputs["ln_n"] = hb.log_bound;
    outputs["holds_ln_n"] = hb.holds_log;
  }
  if (!warnings.empty()) outputs["warnings"] = std::move(warnings);
  return detail::run_result("solve", &inst, std::move(outputs), detail::elapsed_ms(start));
}

inline int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode != "pne" && a.mode != "opt" && a.mode != "both") {
    throw ValidationError("mode must be pne, opt or both");
  }
  if (a.inputs.empty()) throw ValidationError("at least one input file is required");
  const std::size_t jobs = std::max<std::size_t>(1, a.jobs);

  std::vector<json> results(a.inputs.size());
  std::vector<char> ok(a.inputs.size(), 1);
  for (std::size_t first = 0; first < a.inputs.size(); first += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t t = first; t < std::min(a.inputs.size(), first + jobs); ++t) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&, t] {
        bool good = true;
        results[t] = solve_one(a.inputs[t], a, good);
        ok[t] = good ? 1 : 0;
      }));
    }
    for (auto& f : batch) f.get();
  }

  const json doc = results.size() == 1 ? results.front() : json(results);
  detail::emit(doc, a.out, out);
  for (std::size_t t = 0; t < ok.size(); ++t) {
    if (!ok[t]) {
      err << "verification failed for '" << a.inputs[t] << "'\n";
      return kValidation;
    }
  }
  return kOk;
}

struct DynamicsArgs {
  std::string input;
  std::string start = "all-1";
  std::string order = "round-robin";
  std::size_t max_steps = 100000;
  std::optional<std::uint64_t> seed;  // required for seeded-random order
  std::string out;
};

/// Start specs: "all-1" (or "all-J"), "random:SEED", "file:PATH" or a bare
/// path to a JSON array of 1-based input facility numbers.
inline Assignment parse_start(const std::string& spec, const Instance& inst) {
  const std::size_t n = inst.agent_count();
  const std::size_t m = inst.facility_count();
  const auto sorted_index = [&](std::size_t input_number) -> FacilityIndex {
    for (FacilityIndex j = 0; j < m; ++j) {
      if (inst.environment.input_index(j) + 1 == input_number) return j;
    }
    throw ValidationError("start refers to facility " + std::to_string(input_number) + " which does not exist");
  };

  if (spec.rfind("all-", 0) == 0) {
    std::size_t j = 0;
    try {
      j = std::stoul(spec.substr(4));
    } catch (const std::exception&) {
      throw ValidationError("invalid start spec '" + spec + "'");
    }
    return Assignment::uniform(n, sorted_index(j));
  }
  if (spec.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(spec.substr(7));
    } catch (const std::exception&) {
      throw ValidationError("invalid start spec '" + spec + "'");
    }
    std::mt19937_64 rng(seed);
    std::vector<FacilityIndex> c(n);
    for (auto& v : c) v = uniform_index(rng, 0, m - 1);
    return Assignment(std::move(c));
  }
  const std::string path = spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
  if (!std::filesystem::exists(path)) throw ValidationError("invalid start spec '" + spec + "'");
  const json doc = read_json_file(path);
  if (!doc.is_array() || doc.size() != n) {
    throw ValidationError("start file must hold one facility number per agent");
  }
  std::vector<FacilityIndex> c;
  for (const json& v : doc) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw ValidationError("start facility numbers must be positive integers");
    }
    c.push_back(sorted_index(v.get<std::size_t>()));
  }
  return Assignment(std::move(c));
}

inline int cmd_dynamics(const DynamicsArgs& a, std::ostream& out) {
  const auto start_time = detail::Clock::now();
  const Instance inst = load_instance(a.input);
  const Environment& env = inst.environment;
  const Assignment start = parse_start(a.start, inst);
  const DynamicsOrder order = parse_dynamics_order(a.order);
  if (order == DynamicsOrder::seeded_random && !a.seed) {
    throw ValidationError("--order seeded-random needs an explicit --seed");
  }
  const auto trace = run_dynamics(inst, start, order, a.max_steps, a.seed.value_or(0));

  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"agent", s.agent + 1},
                     {"from_facility", env.input_index(s.from_facility) + 1},
                     {"to_facility", env.input_index(s.to_facility) + 1},
                     {"cost_delta", s.cost_delta},
                     {"potential_after", s.potential_after}});
  }
  const json summary{{"steps", trace.steps.size()}, {"converged", trace.converged}};
  json outputs{{"order", std::string(to_string(order))},
               {"start", detail::assignment_json(start, env)},
               {"initial_potential", trace.initial_potential},
               {"steps", std::move(steps)},
               {"converged", trace.converged},
               {"final_assignment", detail::assignment_json(trace.final_assignment, env)},
               {"final_potential", potential(inst.profile, trace.final_assignment, env)},
               {"summary", summary}};
  const json doc = detail::run_result("dynamics", &inst, std::move(outputs), detail::elapsed_ms(start_time));
  if (a.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    write_text_file(a.out, doc.dump(2) + "\n");
    out << summary.dump() << "\n";
  }
  return kOk;
}

struct MechArgs {
  std::string input;
  std::string mech;  // JSON text or path; empty = instance's "mechanism" key
  std::string audits;
  std::string density = "standard";
  std::string out;
};

inline MechanismSpec load_mechanism_spec(const std::string& mech, const std::string& instance_path) {
  if (mech.empty()) {
    const json doc = read_json_file(instance_path);
    if (!doc.contains("mechanism")) throw ValidationError("no --mech given and the instance has no 'mechanism'");
    return mechanism_from_json(doc.at("mechanism"));
  }
  const auto first = mech.find_first_not_of(" \t\n");
  if (first != std::string::npos && mech[first] == '{') {
    try {
      return mechanism_from_json(json::parse(mech));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("mechanism spec: ") + e.what());
    }
  }
  return mechanism_from_json(read_json_file(mech));
}

inline int cmd_mech(const MechArgs& a, std::ostream& out) {
  const auto start = detail::Clock::now();
  const Instance inst = load_instance(a.input);
  const Environment& env = inst.environment;
  const MechanismSpec spec = load_mechanism_spec(a.mech, a.input);
  const Mechanism f(spec, env);
  const std::size_t n = inst.agent_count();

  const Assignment s = f(inst.profile);
  const auto costs = social_cost(inst.profile, s, env);
  json outputs{{"mechanism", mechanism_to_json(spec)},
               {"description", describe(spec)},
               {"assignment", detail::assignment_json(s, env)},
               {"social_cost", costs.social_cost},
               {"potential", potential(inst.profile, s, env)}};
  if (const auto xs = f.x_star()) outputs["x_star"] = extended_real(*xs);
  if (env.size() == 2) {
    const EnvParams p = env_params(env);
    outputs["env_params"] = {{"L", p.L}, {"M", p.M}, {"R", p.R}, {"delta", p.delta}};
    const EnvClassification c = classify_environment(env);
    const auto types = [](const TypeSet& t) {
      static constexpr const char* kNames[] = {"type1", "type2", "type3", "type4", "type5"};
      json out = json::array();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i]) out.push_back(kNames[i]);
      }
      return out;
    };
    outputs["classification"] = {{"row", c.row},
                                 {"rows", c.rows},
                                 {"table_types", types(c.table_types)},
                                 {"constructible", types(c.constructible)},
                                 {"gap_left", c.gap_left},
                                 {"gap_right", c.gap_right}};
  }

  const auto audits = detail::split_csv(a.audits);
  if (!audits.empty()) {
    const GridOptions go = detail::grid_options(a.density);
    const auto grid = breakpoint_grid(env, n, go);
    const auto misreports = breakpoint_grid(env, n, GridOptions{});
    AuditOptions ao;
    ao.space = n <= 2 ? ProfileSpace::cartesian : ProfileSpace::sorted;
    json reports = json::object();
    for (const auto& name : audits) {
      if (name == "sp") {
        reports["strategyproof"] = detail::audit_json(audit_strategyproof(f, env, n, grid, misreports, ao), env);
      } else if (name == "anon") {
        reports["anonymous"] = detail::audit_json(audit_anonymous(f, env, n, grid, ao), env);
      } else if (name == "unanimous") {
        reports["unanimous"] = detail::audit_json(audit_unanimous(f, env, n, grid, ao), env);
      } else if (name == "lemma") {
        reports["lemma_properties"] = detail::lemma_json(audit_lemma_properties(f, env, n, grid));
      } else if (name == "ratio") {
        const auto r = empirical_ratio(f, env, n, grid);
        reports["empirical_ratio"] = {{"worst_ratio", r.worst_ratio}, {"witness_profile", r.witness_profile}};
      } else {
        throw ValidationError("unknown audit '" + name + "' (expected sp, anon, unanimous, lemma, ratio)");
      }
    }
    outputs["audits"] = std::move(reports);
    outputs["grid_points"] = grid.size();
  }
  detail::emit(detail::run_result("mech", &inst, std::move(outputs), detail::elapsed_ms(start)), a.out, out);
  return kOk;
}

struct RatioArgs {
  std::vector<double> epsilons{0.5, 0.2, 0.1, 0.05};
  std::string out;
};

inline int cmd_ratio(const RatioArgs& a, std::ostream& out) {
  const auto start = detail::Clock::now();
  for (double eps : a.epsilons) {
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  }
  json rows = json::array();
  for (double eps : a.epsilons) {
    const Environment env = epsilon_environment(eps);
    const EnvParams p = env_params(env);
    const double bound = ratio_lower_bound(env);
    const double target = 1.0 / (2 * eps * eps);
    rows.push_back({{"epsilon", eps},
                    {"L", p.L},
                    {"M", p.M},
                    {"R", p.R},
                    {"delta", p.delta},
                    {"ratio_lower_bound", bound},
                    {"inverse_two_eps_sq", target},
                    {"equal", detail::relative_equal(bound, target)},
                    {"at_least", bound >= target * (1 - 1e-9)}});
  }
  detail::emit(detail::run_result("ratio", nullptr, json{{"rows", std::move(rows)}}, detail::elapsed_ms(start)),
               a.out, out);
  return kOk;
}

// ---------------------------------------------------------------------------

/// Parses argv and dispatches; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria, optima and strategyproof mechanisms for one-dimensional facility "
               "assignment with fair cost sharing"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a random instance");
  g->add_option("-n", gen.n, "number of agents")->required();
  g->add_option("-m", gen.m, "number of facilities")->required();
  g->add_option("--seed", gen.seed, "random seed")->required();
  g->add_option("-o,--out", gen.out, "output file (default: stdout)");
  g->add_option("--name", gen.name, "instance name");
  g->add_option("--pos-min", gen.ranges.position_min);
  g->add_option("--pos-max", gen.ranges.position_max);
  g->add_option("--cost-min", gen.ranges.cost_min);
  g->add_option("--cost-max", gen.ranges.cost_max);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "compute a potential-minimizing equilibrium and/or the optimum");
  s->add_option("-i,--input,inputs", solve.inputs, "instance file(s)")->required();
  s->add_option("--mode", solve.mode, "pne, opt or both");
  s->add_flag("--verify", solve.verify, "re-check results (equilibrium test, brute-force oracles)");
  s->add_option("--jobs", solve.jobs, "solve this many input files concurrently");
  s->add_option("-o,--out", solve.out);

  DynamicsArgs dyn;
  auto* d = app.add_subcommand("dynamics", "run best-response dynamics");
  d->add_option("-i,--input,input", dyn.input, "instance file")->required();
  d->add_option("--start", dyn.start, "all-J, random:SEED, file:PATH");
  d->add_option("--order", dyn.order, "round-robin, max-gain or seeded-random");
  d->add_option("--max-steps", dyn.max_steps);
  d->add_option("--seed", dyn.seed, "seed for seeded-random order");
  d->add_option("-o,--out", dyn.out, "write the trace here and print only the summary");

  MechArgs mech;
  auto* mc = app.add_subcommand("mech", "apply and audit a mechanism");
  mc->add_option("-i,--input,input", mech.input, "instance file")->required();
  mc->add_option("--mech", mech.mech, "mechanism JSON text or file");
  mc->add_option("--audit", mech.audits, "comma list of sp, anon, unanimous, lemma, ratio");
  mc->add_option("--grid", mech.density, "coarse, standard or fine");
  mc->add_option("-o,--out", mech.out);

  RatioArgs ratio;
  auto* r = app.add_subcommand("ratio", "approximation lower bounds on the epsilon environments");
  r->add_option("--epsilon", ratio.epsilons, "epsilon values in (0, 1)")->delimiter(',');
  r->add_option("-o,--out", ratio.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (g->parsed()) {
      if (gen.n < 1) throw ValidationError("n must be ≥ 1");
      if (gen.m < 1) throw ValidationError("m must be ≥ 1");
      return cmd_gen(gen, out);
    }
    if (s->parsed()) return cmd_solve(solve, out, err);
    if (d->parsed()) return cmd_dynamics(dyn, out);
    if (mc->parsed()) return cmd_mech(mech, out);
    if (r->parsed()) return cmd_ratio(ratio, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace fagfcs::cli
