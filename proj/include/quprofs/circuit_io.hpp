// Copyright 2026 The QuProFS Authors
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

// JSON circuit documents:
//   {"id": 3, "family": "hea", "n_qubits": 2, "theta_count": 1,
//    "gates": [{"kind": "ry", "qubits": [0], "role": {"type": "data", "index": 0, "scale": 1.0}},
//              {"kind": "cx", "qubits": [0, 1]},
//              {"kind": "rz", "qubits": [1], "role": {"type": "variational", "index": 0}}]}
// A circuit file holds either one such object or an array of them.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quprofs/circuit.hpp"

namespace quprofs {

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : c.gates) {
    nlohmann::json jg;
    jg["kind"] = std::string(to_string(g.kind));
    jg["qubits"] = g.arity() == 2 ? nlohmann::json::array({g.qubits[0], g.qubits[1]})
                                  : nlohmann::json::array({g.qubits[0]});
    if (g.role) {
      nlohmann::json role;
      if (const auto* d = std::get_if<DataParam>(&*g.role)) {
        role = {{"type", "data"}, {"index", d->feature_index}, {"scale", d->scale}};
      } else if (const auto* v = std::get_if<VariationalParam>(&*g.role)) {
        role = {{"type", "variational"}, {"index", v->theta_index}};
      } else {
        role = {{"type", "fixed"}, {"angle", std::get<FixedAngle>(*g.role).angle}};
      }
      jg["role"] = role;
    }
    gates.push_back(std::move(jg));
  }
  return {{"id", c.id},
          {"family", std::string(to_string(c.family))},
          {"n_qubits", c.n_qubits},
          {"theta_count", c.theta_count},
          {"gates", std::move(gates)}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  try {
    Circuit c;
    c.n_qubits = j.at("n_qubits").get<int>();
    c.theta_count = j.at("theta_count").get<int>();
    c.id = j.value("id", std::uint64_t{0});
    c.family = family_from_string(j.value("family", std::string("custom")));
    for (const auto& jg : j.at("gates")) {
      Gate g;
      g.kind = gate_kind_from_string(jg.at("kind").get<std::string>());
      const auto& qs = jg.at("qubits");
      if (static_cast<int>(qs.size()) != g.arity()) {
        throw ConfigError("gate '" + std::string(to_string(g.kind)) + "' expects " + std::to_string(g.arity()) +
                          " qubit(s)");
      }
      g.qubits[0] = qs[0].get<int>();
      g.qubits[1] = g.arity() == 2 ? qs[1].get<int>() : -1;
      if (jg.contains("role")) {
        const auto& r = jg["role"];
        const auto type = r.at("type").get<std::string>();
        if (type == "data") {
          g.role = DataParam{r.at("index").get<int>(), r.value("scale", 1.0)};
        } else if (type == "variational") {
          g.role = VariationalParam{r.at("index").get<int>()};
        } else if (type == "fixed") {
          g.role = FixedAngle{r.at("angle").get<double>()};
        } else {
          throw ConfigError("unknown role type '" + type + "'");
        }
      }
      c.gates.push_back(std::move(g));
    }
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit document: ") + e.what());
  } catch (const CircuitError& e) {
    throw ConfigError(std::string("circuit document: ") + e.what());
  }
}

inline void save_circuits(const std::string& path, const std::vector<Circuit>& circuits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Circuit& c : circuits) arr.push_back(to_json(c));
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << arr.dump(2) << '\n';
}

inline std::vector<Circuit> load_circuits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open circuit file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::vector<Circuit> out;
  if (j.is_array()) {
    for (const auto& jc : j) out.push_back(circuit_from_json(jc));
  } else {
    out.push_back(circuit_from_json(j));
  }
  return out;
}

}  // namespace quprofs
