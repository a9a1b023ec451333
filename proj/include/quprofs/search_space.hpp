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
 * search_space.hpp
 *
 * Hardware-aware circuit samplers. Three families:
 *
 *   hea           L blocks of {one rotation per qubit, CX sweep over the coupling edges}
 *   covariant     L blocks of {CX on every coupling edge, RZ(x_2q) RY(x_2q+1) per qubit}
 *   unstructured  gates drawn one at a time, accepted with probability
 *                 exp(-eps_g / T) so low-error gates are favoured
 *
 * Every sampler emits circuits that pass check_hardware_aware for the device
 * it was given. Each family also exposes a single-block sampler used by layer
 * augmentation.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "quprofs/circuit.hpp"
#include "quprofs/common.hpp"
#include "quprofs/device.hpp"

namespace quprofs {

enum class FeatureAssignment { RoundRobin, Random };

struct SamplerConfig {
  int n_qubits = 4;
  int n_features = 4;
  int layers_min = 1;
  int layers_max = 4;
  std::array<double, 3> family_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};  // hea, covariant, unstructured
  double data_fraction = 0.5;
  FeatureAssignment feature_assignment = FeatureAssignment::RoundRobin;
  int unstructured_min = -1;  // -1: n_qubits
  int unstructured_max = -1;  // -1: 4 * n_qubits
  double fidelity_bias_temperature = 0.05;
  double data_scale = 1.0;  // multiplier stored on every Data role
  // Encoding bandwidths to search over. When non-empty, each sampled circuit
  // draws one entry uniformly and uses it for all of its data rotations.
  std::vector<double> data_scales{0.25, 0.5, 1.0, 2.0, 4.0};

  int budget_min() const { return unstructured_min < 0 ? n_qubits : unstructured_min; }
  int budget_max() const { return unstructured_max < 0 ? 4 * n_qubits : unstructured_max; }

  void validate() const {
    if (n_qubits < 1) throw ConfigError("sampler.n_qubits must be >= 1");
    if (n_features < 1) throw ConfigError("sampler.n_features must be >= 1");
    if (layers_min < 1 || layers_max < layers_min) throw ConfigError("sampler: need 1 <= layers_min <= layers_max");
    double total = 0.0;
    for (double w : family_weights) {
      if (!(w >= 0.0)) throw ConfigError("sampler.family_weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("sampler.family_weights must sum to 1");
    if (!(data_fraction >= 0.0 && data_fraction <= 1.0)) throw ConfigError("sampler.data_fraction must be in [0,1]");
    if (budget_min() < 1 || budget_max() < budget_min()) throw ConfigError("sampler: invalid unstructured gate budget");
    if (!(fidelity_bias_temperature > 0.0)) throw ConfigError("sampler.fidelity_bias_temperature must be > 0");
    for (double s : data_scales) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sampler.data_scales must be positive and finite");
    }
  }

  /// Rescales weights to sum to one.
  void normalize_weights() {
    const double total = family_weights[0] + family_weights[1] + family_weights[2];
    if (!(total > 0.0)) throw ConfigError("sampler.family_weights: all zero");
    for (double& w : family_weights) w /= total;
  }
};

namespace detail {

/// Hands out roles for rotations as a block is built; continues the feature
/// cursor and theta counter of the circuit being extended.
class RoleAllocator {
 public:
  RoleAllocator(const SamplerConfig& cfg, const Circuit& base) : cfg_(cfg), next_theta_(base.theta_count) {
    for (const Gate& g : base.gates) feature_cursor_ += g.is_data() ? 1 : 0;
  }

  ParamRole next(Rng& rng) {
    if (bernoulli(rng, cfg_.data_fraction)) return next_data(rng);
    return VariationalParam{next_theta_++};
  }

  DataParam next_data(Rng& rng) {
    int f;
    if (cfg_.feature_assignment == FeatureAssignment::RoundRobin) {
      f = feature_cursor_ % cfg_.n_features;
    } else {
      f = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg_.n_features)));
    }
    ++feature_cursor_;
    return DataParam{f, cfg_.data_scale};
  }

 private:
  const SamplerConfig& cfg_;
  int next_theta_ = 0;
  int feature_cursor_ = 0;
};

inline std::vector<GateKind> native_rotations(const DeviceModel& d) {
  std::vector<GateKind> out;
  for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
    if (d.is_native(k)) out.push_back(k);
  }
  return out;
}

inline void check_fits(const DeviceModel& device, const SamplerConfig& cfg) {
  if (cfg.n_qubits > device.n_qubits()) {
    throw ConfigError("sampler: " + std::to_string(cfg.n_qubits) + " qubits requested, device has " +
                      std::to_string(device.n_qubits()));
  }
  if (cfg.n_qubits > 1 && device.edges_within(cfg.n_qubits).empty()) {
    throw ConfigError("sampler: device has no coupling edges among the first " + std::to_string(cfg.n_qubits) +
                      " qubits");
  }
  if (cfg.n_qubits > 1 && !device.is_native(GateKind::CX)) throw ConfigError("sampler: device has no native CX");
}

inline void finish(Circuit& c) {
  c.theta_count = count_thetas(c.gates);
  validate(c);
}

}  // namespace detail

/// Appends one HEA block to `c`: a rotation per qubit followed by a CX sweep.
inline void append_hea_block(Circuit& c, const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  const auto rotations = detail::native_rotations(device);
  if (rotations.empty()) throw ConfigError("sampler: device has no native rotation gates");
  detail::RoleAllocator roles(cfg, c);
  for (int q = 0; q < cfg.n_qubits; ++q) {
    const GateKind k = rotations[uniform_index(rng, rotations.size())];
    c.gates.push_back(Gate::single(k, q, roles.next(rng)));
  }
  // the sweep visits every edge once, starting at a random edge in a random direction
  std::vector<Edge> sweep = device.edges_within(cfg.n_qubits);
  if (!sweep.empty()) {
    const std::size_t offset = uniform_index(rng, sweep.size());
    std::rotate(sweep.begin(), sweep.begin() + static_cast<std::ptrdiff_t>(offset), sweep.end());
    const bool reverse = bernoulli(rng, 0.5);
    if (reverse) std::reverse(sweep.begin(), sweep.end());
    for (const auto& [a, b] : sweep) c.gates.push_back(reverse ? Gate::cx(b, a) : Gate::cx(a, b));
  }
  detail::finish(c);
}

/// Appends one covariant block: CX on every coupling edge, then RZ/RY data
/// encodings of features 2q and 2q+1 (mod n_features) on each qubit q.
inline void append_covariant_block(Circuit& c, const DeviceModel& device, const SamplerConfig& cfg) {
  if (!device.is_native(GateKind::RZ) || !device.is_native(GateKind::RY)) {
    throw ConfigError("sampler: covariant template needs native rz and ry");
  }
  for (const auto& [a, b] : device.edges_within(cfg.n_qubits)) c.gates.push_back(Gate::cx(a, b));
  for (int q = 0; q < cfg.n_qubits; ++q) {
    c.gates.push_back(Gate::data(GateKind::RZ, q, (2 * q) % cfg.n_features, cfg.data_scale));
    c.gates.push_back(Gate::data(GateKind::RY, q, (2 * q + 1) % cfg.n_features, cfg.data_scale));
  }
  detail::finish(c);
}

/// Appends `count` noise-biased gates to `c`.
inline void append_unstructured_gates(Circuit& c, const DeviceModel& device, const SamplerConfig& cfg, int count,
                                      Rng& rng) {
  std::vector<GateKind> kinds;
  for (GateKind k : device.native_gates()) {
    if (!is_two_qubit(k) || cfg.n_qubits > 1) kinds.push_back(k);
  }
  if (kinds.empty()) throw ConfigError("sampler: no usable native gates");
  const std::vector<Edge> edges = device.edges_within(cfg.n_qubits);
  detail::RoleAllocator roles(cfg, c);
  const double t = cfg.fidelity_bias_temperature;
  int placed = 0;
  while (placed < count) {
    const GateKind k = kinds[uniform_index(rng, kinds.size())];
    Gate g;
    if (is_two_qubit(k)) {
      const Edge e = edges[uniform_index(rng, edges.size())];
      g = bernoulli(rng, 0.5) ? Gate::cx(e.first, e.second) : Gate::cx(e.second, e.first);
    } else {
      g = Gate::single(k, static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg.n_qubits))));
    }
    // Boltzmann weight exp((1 - eps)/T), normalised by the eps = 0 weight
    const double eps = device.gate_error(g.kind, g.qubits[0], g.qubits[1]);
    if (!bernoulli(rng, std::exp(-eps / t))) continue;
    if (is_rotation(k)) g.role = roles.next(rng);
    c.gates.push_back(std::move(g));
    ++placed;
  }
  detail::finish(c);
}

inline Circuit sample_hea(const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  detail::check_fits(device, cfg);
  Circuit c;
  c.n_qubits = cfg.n_qubits;
  c.family = Family::Hea;
  const int layers = cfg.layers_min + static_cast<int>(uniform_index(
                                          rng, static_cast<std::uint64_t>(cfg.layers_max - cfg.layers_min + 1)));
  for (int l = 0; l < layers; ++l) append_hea_block(c, device, cfg, rng);
  return c;
}

inline Circuit sample_covariant(const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  detail::check_fits(device, cfg);
  Circuit c;
  c.n_qubits = cfg.n_qubits;
  c.family = Family::Covariant;
  const int layers = cfg.layers_min + static_cast<int>(uniform_index(
                                          rng, static_cast<std::uint64_t>(cfg.layers_max - cfg.layers_min + 1)));
  for (int l = 0; l < layers; ++l) append_covariant_block(c, device, cfg);
  return c;
}

inline Circuit sample_unstructured(const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  detail::check_fits(device, cfg);
  Circuit c;
  c.n_qubits = cfg.n_qubits;
  c.family = Family::Unstructured;
  const int count = cfg.budget_min() + static_cast<int>(uniform_index(
                                           rng, static_cast<std::uint64_t>(cfg.budget_max() - cfg.budget_min() + 1)));
  append_unstructured_gates(c, device, cfg, count, rng);
  return c;
}

inline Family draw_family(const SamplerConfig& cfg, Rng& rng) {
  const double u = uniform_real(rng);
  if (u < cfg.family_weights[0]) return Family::Hea;
  if (u < cfg.family_weights[0] + cfg.family_weights[1]) return Family::Covariant;
  if (cfg.family_weights[2] > 0.0) return Family::Unstructured;
  return cfg.family_weights[1] > 0.0 ? Family::Covariant : Family::Hea;
}

/// Bandwidth for a new circuit: one entry of data_scales, or data_scale.
inline double draw_data_scale(const SamplerConfig& cfg, Rng& rng) {
  if (cfg.data_scales.empty()) return cfg.data_scale;
  return cfg.data_scales[static_cast<std::size_t>(uniform_index(rng, cfg.data_scales.size()))];
}

/// Samples one circuit of `family`, first drawing its encoding bandwidth.
inline Circuit sample_family(Family family, const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  SamplerConfig local = cfg;
  local.data_scale = draw_data_scale(cfg, rng);
  switch (family) {
    case Family::Hea: return sample_hea(device, local, rng);
    case Family::Covariant: return sample_covariant(device, local, rng);
    case Family::Unstructured: return sample_unstructured(device, local, rng);
    case Family::Custom: break;
  }
  throw ConfigError("cannot sample the custom family");
}

/// `count` circuits with ids 0..count-1. Circuit i is drawn from its own
/// stream derive_seed(seed, "sample", i).
inline std::vector<Circuit> sample_population(const DeviceModel& device, const SamplerConfig& cfg, int count,
                                              std::uint64_t seed) {
  if (count < 1) throw ConfigError("sample_population: count must be >= 1");
  cfg.validate();
  detail::check_fits(device, cfg);
  std::vector<Circuit> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, "sample", static_cast<std::uint64_t>(i));
    const Family f = draw_family(cfg, rng);
    Circuit c = sample_family(f, device, cfg, rng);
    c.id = static_cast<std::uint64_t>(i);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace quprofs
