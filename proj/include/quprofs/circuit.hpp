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

/*
 * circuit.hpp
 *
 * Gate-list intermediate representation for parameterized circuits.
 *
 * A gate's angle comes from one of three sources: a data feature
 * (scale * x[feature_index]), a variational parameter theta[theta_index]
 * or a fixed angle. Binding resolves all of them to radians.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quprofs/common.hpp"

namespace quprofs {

enum class GateKind { RX, RY, RZ, H, X, CX };

inline constexpr std::array<GateKind, 6> kAllGateKinds = {GateKind::RX, GateKind::RY, GateKind::RZ,
                                                          GateKind::H,  GateKind::X,  GateKind::CX};

inline constexpr bool is_rotation(GateKind k) {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

inline constexpr bool is_two_qubit(GateKind k) { return k == GateKind::CX; }

inline constexpr std::string_view to_string(GateKind k) {
  switch (k) {
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::CX: return "cx";
  }
  return "?";
}

inline GateKind gate_kind_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (GateKind k : kAllGateKinds) {
    if (to_string(k) == lower) return k;
  }
  if (lower == "cnot") return GateKind::CX;
  throw ConfigError("unknown gate kind '" + std::string(s) + "'");
}

struct DataParam {
  int feature_index = 0;
  double scale = 1.0;
  bool operator==(const DataParam&) const = default;
};

struct VariationalParam {
  int theta_index = 0;
  bool operator==(const VariationalParam&) const = default;
};

struct FixedAngle {
  double angle = 0.0;
  bool operator==(const FixedAngle&) const = default;
};

using ParamRole = std::variant<DataParam, VariationalParam, FixedAngle>;

struct Gate {
  GateKind kind = GateKind::H;
  std::array<int, 2> qubits{0, -1};  // qubits[1] == -1 for single-qubit gates
  std::optional<ParamRole> role;

  int arity() const { return is_two_qubit(kind) ? 2 : 1; }
  bool is_variational() const { return role && std::holds_alternative<VariationalParam>(*role); }
  bool is_data() const { return role && std::holds_alternative<DataParam>(*role); }

  bool operator==(const Gate&) const = default;

  static Gate single(GateKind kind, int q, std::optional<ParamRole> role = std::nullopt) {
    return Gate{kind, {q, -1}, std::move(role)};
  }
  static Gate cx(int control, int target) { return Gate{GateKind::CX, {control, target}, std::nullopt}; }
  static Gate data(GateKind kind, int q, int feature, double scale = 1.0) {
    return single(kind, q, DataParam{feature, scale});
  }
  static Gate variational(GateKind kind, int q, int theta) {
    return single(kind, q, VariationalParam{theta});
  }
  static Gate fixed(GateKind kind, int q, double angle) { return single(kind, q, FixedAngle{angle}); }
};

/// Which sampler produced a circuit; layer augmentation draws from the same one.
enum class Family { Hea, Covariant, Unstructured, Custom };

inline constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Hea: return "hea";
    case Family::Covariant: return "covariant";
    case Family::Unstructured: return "unstructured";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline Family family_from_string(std::string_view s) {
  for (Family f : {Family::Hea, Family::Covariant, Family::Unstructured, Family::Custom}) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("unknown circuit family '" + std::string(s) + "'");
}

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  int theta_count = 0;
  std::uint64_t id = 0;
  Family family = Family::Custom;

  bool operator==(const Circuit&) const = default;
};

/// 1 + the largest variational index in the gate list, or 0 if there is none.
inline int count_thetas(const std::vector<Gate>& gates) {
  int count = 0;
  for (const Gate& g : gates) {
    if (const auto* v = g.role ? std::get_if<VariationalParam>(&*g.role) : nullptr) {
      count = std::max(count, v->theta_index + 1);
    }
  }
  return count;
}

/// Throws CircuitError if any structural invariant is broken.
inline void validate(const Circuit& c) {
  if (c.n_qubits < 0) throw CircuitError("negative qubit count");
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    const std::string where = "gate " + std::to_string(i) + " (" + std::string(to_string(g.kind)) + ")";
    for (int a = 0; a < g.arity(); ++a) {
      if (g.qubits[a] < 0 || g.qubits[a] >= c.n_qubits) {
        throw CircuitError(where + ": qubit index out of range");
      }
    }
    if (g.arity() == 2 && g.qubits[0] == g.qubits[1]) {
      throw CircuitError(where + ": CX operands must be distinct");
    }
    if (is_rotation(g.kind) && !g.role) throw CircuitError(where + ": rotation without angle");
    if (!is_rotation(g.kind) && g.role) throw CircuitError(where + ": non-rotation gate carries an angle");
    if (g.role) {
      if (const auto* d = std::get_if<DataParam>(&*g.role); d && d->feature_index < 0) {
        throw CircuitError(where + ": negative feature index");
      }
      if (const auto* v = std::get_if<VariationalParam>(&*g.role); v && v->theta_index < 0) {
        throw CircuitError(where + ": negative theta index");
      }
    }
  }
  if (c.theta_count != count_thetas(c.gates)) {
    throw CircuitError("theta_count " + std::to_string(c.theta_count) + " does not match gate list (" +
                       std::to_string(count_thetas(c.gates)) + ")");
  }
}

inline Circuit make_circuit(int n_qubits, std::vector<Gate> gates, std::uint64_t id = 0,
                            Family family = Family::Custom) {
  Circuit c;
  c.n_qubits = n_qubits;
  c.theta_count = count_thetas(gates);
  c.gates = std::move(gates);
  c.id = id;
  c.family = family;
  validate(c);
  return c;
}

/// Renumbers variational indices to 0..k-1 in order of first appearance.
inline void compact_thetas(Circuit& c) {
  std::vector<int> remap;
  int next = 0;
  for (Gate& g : c.gates) {
    if (auto* v = g.role ? std::get_if<VariationalParam>(&*g.role) : nullptr) {
      if (v->theta_index >= static_cast<int>(remap.size())) remap.resize(v->theta_index + 1, -1);
      int& slot = remap[v->theta_index];
      if (slot < 0) slot = next++;
      v->theta_index = slot;
    }
  }
  c.theta_count = next;
}

struct CircuitStats {
  int depth = 0;
  int gate_count = 0;
  int cnot_count = 0;
  int param_count = 0;
  bool operator==(const CircuitStats&) const = default;
};

/// Length of the longest chain of gates sharing a qubit.
inline int depth(const Circuit& c) {
  std::vector<int> level(static_cast<std::size_t>(std::max(c.n_qubits, 0)), 0);
  int d = 0;
  for (const Gate& g : c.gates) {
    int l = 0;
    for (int a = 0; a < g.arity(); ++a) l = std::max(l, level[g.qubits[a]]);
    ++l;
    for (int a = 0; a < g.arity(); ++a) level[g.qubits[a]] = l;
    d = std::max(d, l);
  }
  return d;
}

inline CircuitStats stats(const Circuit& c) {
  CircuitStats s;
  s.depth = depth(c);
  s.gate_count = static_cast<int>(c.gates.size());
  s.cnot_count = static_cast<int>(
      std::count_if(c.gates.begin(), c.gates.end(), [](const Gate& g) { return g.kind == GateKind::CX; }));
  s.param_count = c.theta_count;
  return s;
}

}  // namespace quprofs
