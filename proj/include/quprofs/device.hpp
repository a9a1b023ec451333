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

#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quprofs/circuit.hpp"

/**
 * Device calibration model.
 *
 * Errors are keyed the way calibration files spell them: "rx@3" for a
 * single-qubit gate on qubit 3, "cx@2-3" for a CX on the (undirected) edge
 * {2,3}. Unlisted gates have zero error. The circuit layout is the identity:
 * circuit qubit i runs on device qubit i.
 */

namespace quprofs {

using Edge = std::pair<int, int>;

inline Edge canonical_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::string error_key(GateKind kind, int q0, int q1 = -1) {
  if (is_two_qubit(kind)) {
    const Edge e = canonical_edge(q0, q1);
    return std::string(to_string(kind)) + "@" + std::to_string(e.first) + "-" + std::to_string(e.second);
  }
  return std::string(to_string(kind)) + "@" + std::to_string(q0);
}

/// Which qubits contribute a readout factor to the fidelity score.
enum class ReadoutPolicy { AllQubits, ActiveQubits };

class DeviceModel {
 public:
  DeviceModel() = default;

  /// Validates and builds a device. Throws ConfigError on any violation.
  DeviceModel(int n_qubits, std::vector<Edge> coupling, std::set<GateKind> native_gates,
              std::map<std::string, double> gate_error, std::vector<double> readout_error,
              std::vector<double> idle_error)
      : n_qubits_(n_qubits),
        native_(std::move(native_gates)),
        gate_error_(std::move(gate_error)),
        readout_(std::move(readout_error)),
        idle_(std::move(idle_error)) {
    if (n_qubits_ < 1) throw ConfigError("n_qubits: must be >= 1");
    for (std::size_t i = 0; i < coupling.size(); ++i) {
      auto [a, b] = coupling[i];
      const std::string path = "coupling[" + std::to_string(i) + "]";
      if (a == b) throw ConfigError(path + ": self-loop on qubit " + std::to_string(a));
      if (a < 0 || b < 0 || a >= n_qubits_ || b >= n_qubits_) throw ConfigError(path + ": qubit out of range");
      const Edge e = canonical_edge(a, b);
      if (std::find(edges_.begin(), edges_.end(), e) == edges_.end()) edges_.push_back(e);
    }
    if (readout_.empty()) readout_.assign(n_qubits_, 0.0);
    if (idle_.empty()) idle_.assign(n_qubits_, 0.0);
    if (static_cast<int>(readout_.size()) != n_qubits_) throw ConfigError("readout_error: expected one entry per qubit");
    if (static_cast<int>(idle_.size()) != n_qubits_) throw ConfigError("idle_error: expected one entry per qubit");
    auto check_p = [](double p, const std::string& path) {
      if (!(p >= 0.0 && p < 1.0)) throw ConfigError(path + ": probability " + std::to_string(p) + " outside [0,1)");
    };
    for (int q = 0; q < n_qubits_; ++q) {
      check_p(readout_[q], "readout_error[" + std::to_string(q) + "]");
      check_p(idle_[q], "idle_error[" + std::to_string(q) + "]");
    }
    std::map<std::string, double> canonical;
    for (const auto& [key, p] : gate_error_) {
      const std::string path = "gate_error." + key;
      check_p(p, path);
      canonical[canonicalize_key(key, path)] = p;
    }
    gate_error_ = std::move(canonical);
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::set<GateKind>& native_gates() const { return native_; }
  const std::map<std::string, double>& gate_errors() const { return gate_error_; }
  const std::vector<double>& readout_errors() const { return readout_; }
  const std::vector<double>& idle_errors() const { return idle_; }

  bool is_native(GateKind k) const { return native_.count(k) != 0; }

  bool has_edge(int a, int b) const {
    return std::find(edges_.begin(), edges_.end(), canonical_edge(a, b)) != edges_.end();
  }

  /// Edges with both endpoints below `n`, in stored order.
  std::vector<Edge> edges_within(int n) const {
    std::vector<Edge> out;
    for (const Edge& e : edges_) {
      if (e.second < n) out.push_back(e);
    }
    return out;
  }

  double gate_error(GateKind kind, int q0, int q1 = -1) const {
    auto it = gate_error_.find(error_key(kind, q0, q1));
    return it == gate_error_.end() ? 0.0 : it->second;
  }

  double readout_error(int q) const { return readout_.at(q); }
  double idle_error(int q) const { return idle_.at(q); }

 private:
  std::string canonicalize_key(const std::string& key, const std::string& path) const {
    const auto at = key.find('@');
    if (at == std::string::npos) throw ConfigError(path + ": expected '<gate>@<qubit>' or '<gate>@<i>-<j>'");
    GateKind kind;
    try {
      kind = gate_kind_from_string(key.substr(0, at));
    } catch (const ConfigError&) {
      throw ConfigError(path + ": unknown gate kind");
    }
    const std::string loc = key.substr(at + 1);
    try {
      if (is_two_qubit(kind)) {
        const auto dash = loc.find('-');
        if (dash == std::string::npos) throw ConfigError(path + ": two-qubit gate needs an edge 'i-j'");
        const int a = std::stoi(loc.substr(0, dash)), b = std::stoi(loc.substr(dash + 1));
        if (!has_edge(a, b)) throw ConfigError(path + ": edge not in coupling map");
        return error_key(kind, a, b);
      }
      const int q = std::stoi(loc);
      if (q < 0 || q >= n_qubits_) throw ConfigError(path + ": qubit out of range");
      return error_key(kind, q);
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ": malformed qubit location");
    } catch (const std::out_of_range&) {
      throw ConfigError(path + ": malformed qubit location");
    }
  }

  int n_qubits_ = 0;
  std::vector<Edge> edges_;
  std::set<GateKind> native_;
  std::map<std::string, double> gate_error_;
  std::vector<double> readout_;
  std::vector<double> idle_;
};

inline DeviceModel device_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n_qubits").get<int>();
    std::vector<Edge> coupling;
    for (const auto& e : j.value("coupling", nlohmann::json::array())) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("coupling: each edge must be a pair [i, j]");
      coupling.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    std::set<GateKind> native;
    if (j.contains("native_gates")) {
      for (const auto& g : j["native_gates"]) {
        try {
          native.insert(gate_kind_from_string(g.get<std::string>()));
        } catch (const ConfigError&) {
          throw ConfigError("native_gates: unknown gate '" + g.get<std::string>() + "'");
        }
      }
    } else {
      native = {kAllGateKinds.begin(), kAllGateKinds.end()};
    }
    std::map<std::string, double> gate_error;
    const nlohmann::json errors = j.value("gate_error", nlohmann::json::object());
    for (const auto& [k, v] : errors.items()) gate_error[k] = v.get<double>();
    auto read_vec = [&](const char* key) {
      std::vector<double> out;
      if (j.contains(key)) out = j[key].get<std::vector<double>>();
      return out;
    };
    return DeviceModel(n, std::move(coupling), std::move(native), std::move(gate_error), read_vec("readout_error"),
                       read_vec("idle_error"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
}

inline nlohmann::json to_json(const DeviceModel& d) {
  nlohmann::json coupling = nlohmann::json::array();
  for (const auto& [a, b] : d.edges()) coupling.push_back({a, b});
  nlohmann::json native = nlohmann::json::array();
  for (GateKind k : d.native_gates()) native.push_back(std::string(to_string(k)));
  return {{"n_qubits", d.n_qubits()}, {"coupling", coupling},          {"native_gates", native},
          {"gate_error", d.gate_errors()}, {"readout_error", d.readout_errors()}, {"idle_error", d.idle_errors()}};
}

inline DeviceModel load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path);
  try {
    return device_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Linear chain with uniform error rates.
inline DeviceModel linear_chain_device(int n_qubits, double rotation_error = 1e-4, double cx_error = 1e-2,
                                       double readout_error = 1e-2, double idle_error = 0.0) {
  std::vector<Edge> coupling;
  std::map<std::string, double> errors;
  for (int q = 0; q < n_qubits; ++q) {
    for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ}) errors[error_key(k, q)] = rotation_error;
    if (q + 1 < n_qubits) {
      coupling.emplace_back(q, q + 1);
      errors[error_key(GateKind::CX, q, q + 1)] = cx_error;
    }
  }
  return DeviceModel(n_qubits, std::move(coupling), {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CX},
                     std::move(errors), std::vector<double>(n_qubits, readout_error),
                     std::vector<double>(n_qubits, idle_error));
}

/// The bundled 12-qubit linear-chain calibration.
inline DeviceModel default_device() { return linear_chain_device(12); }

/// True iff every gate is native and every CX sits on a coupling edge.
inline bool check_hardware_aware(const Circuit& c, const DeviceModel& d) {
  if (c.n_qubits > d.n_qubits()) return false;
  for (const Gate& g : c.gates) {
    if (!d.is_native(g.kind)) return false;
    if (g.arity() == 2 && !d.has_edge(g.qubits[0], g.qubits[1])) return false;
  }
  return true;
}

/// Product of per-gate, readout and idle survival probabilities.
inline double hardware_fidelity(const Circuit& c, const DeviceModel& d,
                                ReadoutPolicy readout = ReadoutPolicy::AllQubits) {
  if (c.n_qubits > d.n_qubits()) {
    throw IncompatibilityError("circuit uses " + std::to_string(c.n_qubits) + " qubits, device has " +
                               std::to_string(d.n_qubits()));
  }
  double f = 1.0;
  std::vector<int> busy(static_cast<std::size_t>(c.n_qubits), 0);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (!d.is_native(g.kind)) {
      throw IncompatibilityError("gate " + std::to_string(i) + " (" + std::string(to_string(g.kind)) +
                                 "): not in the device's native gate set");
    }
    if (g.arity() == 2 && !d.has_edge(g.qubits[0], g.qubits[1])) {
      throw IncompatibilityError("gate " + std::to_string(i) + " (cx " + std::to_string(g.qubits[0]) + "," +
                                 std::to_string(g.qubits[1]) + "): qubits are not coupled");
    }
    f *= 1.0 - d.gate_error(g.kind, g.qubits[0], g.qubits[1]);
    for (int a = 0; a < g.arity(); ++a) ++busy[g.qubits[a]];
  }
  // every gate on a qubit occupies its own layer, so the rest of the depth is idle
  const int layers = depth(c);
  for (int q = 0; q < c.n_qubits; ++q) {
    if (readout == ReadoutPolicy::AllQubits || busy[q] > 0) f *= 1.0 - d.readout_error(q);
    const int idle_layers = layers - busy[q];
    if (idle_layers > 0 && d.idle_error(q) > 0.0) f *= std::pow(1.0 - d.idle_error(q), idle_layers);
  }
  return f;
}

}  // namespace quprofs
