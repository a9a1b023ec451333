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

#include <cmath>
#include <variant>
#include <vector>

#include "quprofs/circuit.hpp"
#include "quprofs/common.hpp"
#include "quprofs/device.hpp"
#include "quprofs/search_space.hpp"

namespace quprofs {

/// Encoding bandwidth already used by `c`: the scale of its first data
/// rotation, or `fallback` if it has none.
inline double circuit_data_scale(const Circuit& c, double fallback) {
  for (const Gate& g : c.gates) {
    if (g.is_data()) return std::get<DataParam>(*g.role).scale;
  }
  return fallback;
}

/// Appends one block drawn from the sampler that produced `c`, keeping the
/// circuit's encoding bandwidth. Custom circuits get an HEA block.
/// Unstructured circuits gain n_qubits gates.
inline Circuit append_layer(const Circuit& c, const DeviceModel& device, const SamplerConfig& cfg, Rng& rng) {
  SamplerConfig local = cfg;
  local.n_qubits = c.n_qubits;
  local.data_scale = circuit_data_scale(c, cfg.data_scale);
  detail::check_fits(device, local);
  Circuit out = c;
  switch (c.family) {
    case Family::Covariant: append_covariant_block(out, device, local); break;
    case Family::Unstructured: append_unstructured_gates(out, device, local, local.n_qubits, rng); break;
    case Family::Hea:
    case Family::Custom: append_hea_block(out, device, local, rng); break;
  }
  return out;
}

/// Removes each gate independently with probability `rate`, then renumbers
/// the surviving variational parameters to 0..k-1 in order.
inline Circuit prune_gates(const Circuit& c, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("prune_gates: rate must be in [0,1]");
  Circuit out = c;
  out.gates.clear();
  for (const Gate& g : c.gates) {
    if (!bernoulli(rng, rate)) out.gates.push_back(g);
  }
  compact_thetas(out);
  return out;
}

struct EvolveConfig {
  int population_size = 150;
  double mutate_fraction = 0.5;  // chance a child is pruned before the append
  double prune_rate = 0.4;
  bool elitism = true;

  void validate() const {
    if (population_size < 1) throw ConfigError("evolve.population_size must be >= 1");
    if (!(mutate_fraction >= 0.0 && mutate_fraction <= 1.0)) throw ConfigError("evolve.mutate_fraction must be in [0,1]");
    if (!(prune_rate >= 0.0 && prune_rate <= 1.0)) throw ConfigError("evolve.prune_rate must be in [0,1]");
  }
};

/// Next population from the selected parents. Parents come first, unchanged
/// (if elitism is on), followed by children in parent order. Each child is
/// parent -> prune (with probability mutate_fraction) -> append_layer.
/// Children get ids next_id, next_id + 1, ...; child c of parent p uses the
/// stream derive_seed(seed, "evolve", p * quota + c).
inline std::vector<Circuit> evolve_population(const std::vector<Circuit>& parents, const DeviceModel& device,
                                              const SamplerConfig& sampler, const EvolveConfig& cfg,
                                              std::uint64_t seed, std::uint64_t next_id) {
  if (parents.empty()) throw Error("evolve_population: no parents");
  cfg.validate();
  const auto k = static_cast<int>(parents.size());
  const int quota = (cfg.population_size + k - 1) / k;
  std::vector<Circuit> out;
  out.reserve(static_cast<std::size_t>(cfg.population_size + k));
  if (cfg.elitism) out.insert(out.end(), parents.begin(), parents.end());
  for (int p = 0; p < k && static_cast<int>(out.size()) < cfg.population_size; ++p) {
    for (int c = 0; c < quota && static_cast<int>(out.size()) < cfg.population_size; ++c) {
      Rng rng = make_rng(seed, "evolve", static_cast<std::uint64_t>(p) * quota + c);
      Circuit child = parents[static_cast<std::size_t>(p)];
      if (bernoulli(rng, cfg.mutate_fraction)) child = prune_gates(child, cfg.prune_rate, rng);
      child = append_layer(child, device, sampler, rng);
      child.id = next_id++;
      out.push_back(std::move(child));
    }
  }
  if (static_cast<int>(out.size()) > cfg.population_size) out.resize(static_cast<std::size_t>(cfg.population_size));
  return out;
}

}  // namespace quprofs
