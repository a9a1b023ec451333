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
 * statevector.hpp
 *
 * Exact statevector simulation of bound circuits.
 *
 * Basis ordering is little-endian: qubit 0 is the least significant bit of
 * the amplitude index. Rotations follow R_a(t) = exp(-i t sigma_a / 2).
 */

#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "quprofs/circuit.hpp"
#include "quprofs/common.hpp"

namespace quprofs {

using Complex = std::complex<double>;

struct BoundGate {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1;
  double angle = 0.0;
};

struct BoundCircuit {
  int n_qubits = 0;
  std::vector<BoundGate> gates;
};

/// Resolves every angle of `circuit` against features `x` and parameters `theta`.
inline BoundCircuit bind(const Circuit& circuit, std::span<const double> x, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != circuit.theta_count) {
    throw BindError("theta has length " + std::to_string(theta.size()) + ", circuit expects " +
                    std::to_string(circuit.theta_count));
  }
  BoundCircuit out;
  out.n_qubits = circuit.n_qubits;
  out.gates.reserve(circuit.gates.size());
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    BoundGate b{g.kind, g.qubits[0], g.qubits[1], 0.0};
    if (g.role) {
      if (const auto* d = std::get_if<DataParam>(&*g.role)) {
        if (d->feature_index < 0 || d->feature_index >= static_cast<int>(x.size())) {
          throw BindError("gate " + std::to_string(i) + ": feature index " + std::to_string(d->feature_index) +
                          " out of range for " + std::to_string(x.size()) + " features");
        }
        b.angle = d->scale * x[d->feature_index];
      } else if (const auto* v = std::get_if<VariationalParam>(&*g.role)) {
        if (v->theta_index < 0 || v->theta_index >= static_cast<int>(theta.size())) {
          throw BindError("gate " + std::to_string(i) + ": theta index " + std::to_string(v->theta_index) +
                          " out of range for " + std::to_string(theta.size()) + " parameters");
        }
        b.angle = theta[v->theta_index];
      } else {
        b.angle = std::get<FixedAngle>(*g.role).angle;
      }
    }
    out.gates.push_back(b);
  }
  return out;
}

class Statevector {
 public:
  Statevector() = default;

  /// |0...0> on n qubits.
  explicit Statevector(int n_qubits) : n_qubits_(n_qubits), amps_(std::size_t{1} << n_qubits, Complex{}) {
    amps_[0] = 1.0;
  }

  Statevector(int n_qubits, std::vector<Complex> amps) : n_qubits_(n_qubits), amps_(std::move(amps)) {
    if (amps_.size() != (std::size_t{1} << n_qubits)) throw Error("amplitude count does not match qubit count");
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return s;
  }

  void apply(const BoundGate& g) {
    switch (g.kind) {
      case GateKind::RX: apply_rx(g.q0, g.angle); break;
      case GateKind::RY: apply_ry(g.q0, g.angle); break;
      case GateKind::RZ: apply_rz(g.q0, g.angle); break;
      case GateKind::H: apply_h(g.q0); break;
      case GateKind::X: apply_x(g.q0); break;
      case GateKind::CX: apply_cx(g.q0, g.q1); break;
    }
  }

  /// Applies the inverse of `g`.
  void apply_inverse(const BoundGate& g) {
    BoundGate inv = g;
    inv.angle = -g.angle;
    apply(inv);
  }

  /// Multiplies by the Pauli generator of a rotation kind (sigma_x, sigma_y or sigma_z).
  void apply_generator(GateKind kind, int q) {
    switch (kind) {
      case GateKind::RX: apply_x(q); break;
      case GateKind::RY: {
        const std::size_t bit = std::size_t{1} << q;
        for_each_pair(q, [&](std::size_t i0) {
          const Complex a0 = amps_[i0], a1 = amps_[i0 | bit];
          amps_[i0] = Complex(a1.imag(), -a1.real());       // -i * a1
          amps_[i0 | bit] = Complex(-a0.imag(), a0.real());  // i * a0
        });
        break;
      }
      case GateKind::RZ: {
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
          if (i & bit) amps_[i] = -amps_[i];
        }
        break;
      }
      default: throw UnsupportedGateError("gate kind has no rotation generator");
    }
  }

  Complex inner(const Statevector& other) const {
    Complex s{};
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s;
  }

 private:
  template <typename F>
  void for_each_pair(int q, F&& f) {
    const std::size_t bit = std::size_t{1} << q;
    const std::size_t n = amps_.size();
    for (std::size_t hi = 0; hi < n; hi += 2 * bit) {
      for (std::size_t lo = 0; lo < bit; ++lo) f(hi + lo);
    }
  }

  void apply_rx(int q, double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    const std::size_t bit = std::size_t{1} << q;
    for_each_pair(q, [&](std::size_t i0) {
      const Complex a0 = amps_[i0], a1 = amps_[i0 | bit];
      // [[c, -is], [-is, c]]
      amps_[i0] = c * a0 + Complex(s * a1.imag(), -s * a1.real());
      amps_[i0 | bit] = Complex(s * a0.imag(), -s * a0.real()) + c * a1;
    });
  }

  void apply_ry(int q, double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    const std::size_t bit = std::size_t{1} << q;
    for_each_pair(q, [&](std::size_t i0) {
      const Complex a0 = amps_[i0], a1 = amps_[i0 | bit];
      amps_[i0] = c * a0 - s * a1;
      amps_[i0 | bit] = s * a0 + c * a1;
    });
  }

  void apply_rz(int q, double t) {
    const Complex p0 = std::polar(1.0, -t / 2), p1 = std::polar(1.0, t / 2);
    const std::size_t bit = std::size_t{1} << q;
    for_each_pair(q, [&](std::size_t i0) {
      amps_[i0] *= p0;
      amps_[i0 | bit] *= p1;
    });
  }

  void apply_h(int q) {
    constexpr double r = 0.70710678118654752440;
    const std::size_t bit = std::size_t{1} << q;
    for_each_pair(q, [&](std::size_t i0) {
      const Complex a0 = amps_[i0], a1 = amps_[i0 | bit];
      amps_[i0] = r * (a0 + a1);
      amps_[i0 | bit] = r * (a0 - a1);
    });
  }

  void apply_x(int q) {
    const std::size_t bit = std::size_t{1} << q;
    for_each_pair(q, [&](std::size_t i0) { std::swap(amps_[i0], amps_[i0 | bit]); });
  }

  void apply_cx(int control, int target) {
    const std::size_t cbit = std::size_t{1} << control, tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
  }

  int n_qubits_ = 0;
  std::vector<Complex> amps_;
};

/// Applies the bound gates in order to |0...0>.
inline Statevector simulate(const BoundCircuit& bound) {
  Statevector psi(bound.n_qubits);
  for (const BoundGate& g : bound.gates) psi.apply(g);
  return psi;
}

inline Statevector simulate(const Circuit& c, std::span<const double> x, std::span<const double> theta) {
  return simulate(bind(c, x, theta));
}

enum class OverlapMode {
  Exact,    // |<phi(x1)|phi(x2)>|^2 from two simulated states
  Adjoint,  // P(0...0) after U(x2)^dagger U(x1)
};

inline double fidelity_overlap(const Circuit& c, std::span<const double> x1, std::span<const double> x2,
                               std::span<const double> theta, OverlapMode mode = OverlapMode::Exact) {
  const BoundCircuit b1 = bind(c, x1, theta);
  const BoundCircuit b2 = bind(c, x2, theta);
  if (mode == OverlapMode::Exact) {
    return std::min(1.0, std::norm(simulate(b1).inner(simulate(b2))));
  }
  Statevector psi = simulate(b1);
  for (auto it = b2.gates.rbegin(); it != b2.gates.rend(); ++it) psi.apply_inverse(*it);
  return std::min(1.0, std::norm(psi[0]));
}

/// <Z_qubit> of `state`.
inline double expectation_z(const Statevector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits()) {
    throw Error("expectation_z: qubit " + std::to_string(qubit) + " out of range");
  }
  const std::size_t bit = std::size_t{1} << qubit;
  double e = 0.0;
  const auto& a = state.amplitudes();
  for (std::size_t i = 0; i < a.size(); ++i) e += (i & bit) ? -std::norm(a[i]) : std::norm(a[i]);
  return e;
}

/// Basis label with qubit n-1 leftmost (qubit 0 is the last character).
inline std::string basis_label(std::size_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (index & (std::size_t{1} << q)) s[n_qubits - 1 - q] = '1';
  }
  return s;
}

/// Draws `n_shots` computational-basis measurements.
inline std::map<std::string, std::uint64_t> sample_shots(const Statevector& state, std::uint64_t n_shots,
                                                         Rng& rng) {
  if (n_shots == 0) throw Error("sample_shots: n_shots must be >= 1");
  const auto& a = state.amplitudes();
  std::vector<double> cdf(a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cdf[i] = (acc += std::norm(a[i]));
  std::vector<std::uint64_t> hits(a.size(), 0);
  for (std::uint64_t s = 0; s < n_shots; ++s) {
    const double u = uniform_real(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), a.size() - 1);
    ++hits[idx];
  }
  std::map<std::string, std::uint64_t> counts;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) counts[basis_label(i, state.n_qubits())] = hits[i];
  }
  return counts;
}

namespace detail {

inline void require_rotation_variationals(const Circuit& c) {
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (c.gates[i].is_variational() && !is_rotation(c.gates[i].kind)) {
      throw UnsupportedGateError("gate " + std::to_string(i) + ": variational gate is not a rotation");
    }
  }
}

}  // namespace detail

/// Gradient of <Z_observable> w.r.t. theta by the two-point shift rule
/// g_k = [f(theta_k + pi/2) - f(theta_k - pi/2)] / 2, summed over every gate
/// that reads theta_k.
inline std::vector<double> param_shift_grad(const Circuit& c, std::span<const double> x,
                                            std::span<const double> theta, int observable) {
  detail::require_rotation_variationals(c);
  const BoundCircuit bound = bind(c, x, theta);
  if (observable < 0 || observable >= c.n_qubits) throw Error("param_shift_grad: observable qubit out of range");
  std::vector<double> grad(static_cast<std::size_t>(c.theta_count), 0.0);

  Statevector prefix(c.n_qubits);
  for (std::size_t k = 0; k < bound.gates.size(); ++k) {
    if (c.gates[k].is_variational()) {
      double f[2];
      for (int side = 0; side < 2; ++side) {
        Statevector psi = prefix;
        BoundGate shifted = bound.gates[k];
        shifted.angle += side == 0 ? kPi / 2 : -kPi / 2;
        psi.apply(shifted);
        for (std::size_t j = k + 1; j < bound.gates.size(); ++j) psi.apply(bound.gates[j]);
        f[side] = expectation_z(psi, observable);
      }
      grad[std::get<VariationalParam>(*c.gates[k].role).theta_index] += 0.5 * (f[0] - f[1]);
    }
    prefix.apply(bound.gates[k]);
  }
  return grad;
}

/// Same gradient as param_shift_grad via one reverse sweep (adjoint
/// differentiation). Cost is a small constant number of passes instead of
/// two suffix simulations per parameter.
inline std::vector<double> adjoint_grad(const Circuit& c, std::span<const double> x, std::span<const double> theta,
                                        int observable, double* value = nullptr) {
  detail::require_rotation_variationals(c);
  const BoundCircuit bound = bind(c, x, theta);
  if (observable < 0 || observable >= c.n_qubits) throw Error("adjoint_grad: observable qubit out of range");
  std::vector<double> grad(static_cast<std::size_t>(c.theta_count), 0.0);

  Statevector psi = simulate(bound);
  if (value) *value = expectation_z(psi, observable);
  Statevector lambda = psi;
  lambda.apply_generator(GateKind::RZ, observable);

  for (std::size_t k = bound.gates.size(); k-- > 0;) {
    const BoundGate& g = bound.gates[k];
    if (c.gates[k].is_variational()) {
      // d/dt <psi|Z|psi> = 2 Re <lambda| dU psi_{k-1}>, dU = -i/2 sigma U
      Statevector mu = psi;
      mu.apply_generator(g.kind, g.q0);
      const Complex overlap = lambda.inner(mu);
      // 2 Re(<lambda| (-i/2) sigma psi_k>) = Im(<lambda|sigma psi_k>)
      grad[std::get<VariationalParam>(*c.gates[k].role).theta_index] += overlap.imag();
    }
    psi.apply_inverse(g);
    lambda.apply_inverse(g);
  }
  return grad;
}

}  // namespace quprofs
