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

// JSON documents for instances and mechanism specs.
//
// Instance:  {"name": str?, "facilities": [{"location": x, "building_cost": b}, ...],
//             "agents": [x1, x2, ...], "mechanism": {...}?}
// Mechanism: {"kind": "type1".."type5" | "krank",
//             "params": {"target" | "boundary_choice" | "k": int,
//                        "diag_choice": "fac1" | "fac2",
//                        "diag_threshold": x?, "diag_inclusive": bool?}}
// Facility numbers in documents are 1-based.

#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fagfcs/mechanisms.hpp"
#include "fagfcs/model.hpp"

namespace fagfcs {

using json = nlohmann::json;

namespace detail {

inline double require_number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::size_t require_index(const json& params, const char* key) {
  if (!params.contains(key)) throw ParseError(std::string("mechanism params need '") + key + "'");
  const json& v = params.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ParseError(std::string("'") + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

inline DiagonalRule parse_diagonal(const json& params) {
  if (params.contains("diag_threshold")) {
    const double t = require_number(params.at("diag_threshold"), "diag_threshold");
    const bool inclusive = params.value("diag_inclusive", false);
    return DiagonalRule{t, inclusive};
  }
  const std::string choice = params.value("diag_choice", std::string("fac1"));
  if (choice == "fac1") return DiagonalRule::facility1();
  if (choice == "fac2") return DiagonalRule::facility2();
  throw ParseError("diag_choice must be \"fac1\" or \"fac2\"");
}

inline json diagonal_to_json(const DiagonalRule& d) {
  if (d.threshold == kInf) return {{"diag_choice", "fac1"}};
  if (d.threshold == -kInf) return {{"diag_choice", "fac2"}};
  return {{"diag_threshold", d.threshold}, {"diag_inclusive", d.inclusive}};
}

}  // namespace detail

[[nodiscard]] inline MechanismSpec mechanism_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) {
    throw ParseError("mechanism needs a string 'kind'");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  const json params = doc.value("params", json::object());
  if (!params.is_object()) throw ParseError("mechanism 'params' must be an object");

  if (kind == "type1") return {TypeI{detail::require_index(params, "target") - 1}};
  if (kind == "type2") return {TypeII{detail::parse_diagonal(params)}};
  if (kind == "type3") return {TypeIII{detail::parse_diagonal(params)}};
  if (kind == "type4") return {TypeIV{detail::require_index(params, "boundary_choice") - 1}};
  if (kind == "type5") return {TypeV{detail::require_index(params, "boundary_choice") - 1}};
  if (kind == "krank") return {KRank{detail::require_index(params, "k")}};
  throw ParseError("unknown mechanism kind '" + kind + "'");
}

[[nodiscard]] inline json mechanism_to_json(const MechanismSpec& spec) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, TypeI>) return {{"kind", "type1"}, {"params", {{"target", k.target + 1}}}};
        if constexpr (std::is_same_v<K, TypeII>) return {{"kind", "type2"}, {"params", detail::diagonal_to_json(k.diagonal)}};
        if constexpr (std::is_same_v<K, TypeIII>) return {{"kind", "type3"}, {"params", detail::diagonal_to_json(k.diagonal)}};
        if constexpr (std::is_same_v<K, TypeIV>) return {{"kind", "type4"}, {"params", {{"boundary_choice", k.boundary_choice + 1}}}};
        if constexpr (std::is_same_v<K, TypeV>) return {{"kind", "type5"}, {"params", {{"boundary_choice", k.boundary_choice + 1}}}};
        if constexpr (std::is_same_v<K, KRank>) return {{"kind", "krank"}, {"params", {{"k", k.k}}}};
      },
      spec.kind);
}

/// Builds an Instance; facilities are sorted by location and their input
/// order is kept in Environment::input_index.
[[nodiscard]] inline Instance instance_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");
  if (!doc.contains("facilities") || !doc.at("facilities").is_array()) {
    throw ParseError("instance needs a 'facilities' array");
  }
  if (!doc.contains("agents") || !doc.at("agents").is_array()) {
    throw ParseError("instance needs an 'agents' array");
  }

  std::vector<double> locations, costs, positions;
  for (const json& f : doc.at("facilities")) {
    if (!f.is_object() || !f.contains("location") || !f.contains("building_cost")) {
      throw ParseError("each facility needs 'location' and 'building_cost'");
    }
    locations.push_back(detail::require_number(f.at("location"), "facility location"));
    costs.push_back(detail::require_number(f.at("building_cost"), "building cost"));
  }
  for (const json& a : doc.at("agents")) positions.push_back(detail::require_number(a, "agent position"));

  std::optional<std::string> name;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ParseError("'name' must be a string");
    name = doc.at("name").get<std::string>();
  }
  return Instance{Environment(std::move(locations), std::move(costs)), Profile(std::move(positions)),
                  std::move(name)};
}

/// Normalized (sorted) instance document.
[[nodiscard]] inline json instance_to_json(const Instance& inst) {
  json doc = json::object();
  if (inst.name) doc["name"] = *inst.name;
  json facilities = json::array();
  for (FacilityIndex j = 0; j < inst.facility_count(); ++j) {
    facilities.push_back({{"location", inst.environment.location(j)},
                          {"building_cost", inst.environment.building_cost(j)}});
  }
  doc["facilities"] = std::move(facilities);
  doc["agents"] = std::vector<double>(inst.profile.positions().begin(), inst.profile.positions().end());
  return doc;
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

[[nodiscard]] inline Instance load_instance(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

inline void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst).dump(2) + "\n");
}

/// Facility numbers (1-based) in the caller's original facility order.
[[nodiscard]] inline std::vector<std::size_t> facilities_in_input_order(const Assignment& s,
                                                                        const Environment& env) {
  std::vector<std::size_t> out;
  out.reserve(s.size());
  for (FacilityIndex j : s.choices()) out.push_back(env.input_index(j) + 1);
  return out;
}

/// JSON number, or the strings "inf" / "-inf".
[[nodiscard]] inline json extended_real(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace fagfcs
