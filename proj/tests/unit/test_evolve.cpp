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

#include <cmath>
#include <set>
#include <variant>

#include <gtest/gtest.h>

#include "quprofs/evolve.hpp"
#include "support/oracles.hpp"

namespace quprofs {
namespace {

// Gate identity ignoring the theta index, which pruning renumbers.
bool same_shape(const Gate& a, const Gate& b) {
  if (a.kind != b.kind || a.qubits != b.qubits || a.role.has_value() != b.role.has_value()) return false;
  if (!a.role) return true;
  if (a.is_variational()) return b.is_variational();
  return *a.role == *b.role;
}

bool is_subsequence(const Circuit& sub, const Circuit& full) {
  std::size_t j = 0;
  for (const Gate& g : full.gates) {
    if (j < sub.gates.size() && same_shape(sub.gates[j], g)) ++j;
  }
  return j == sub.gates.size();
}

SamplerConfig config(int n) {
  SamplerConfig cfg;
  cfg.n_qubits = n;
  cfg.n_features = n;
  return cfg;
}

TEST(Prune, ExtremeRates) {
  Rng rng = make_rng(1, "prune");
  const Circuit c = testing::random_circuit(3, 20, 2, 5, rng);
  EXPECT_EQ(prune_gates(c, 0.0, rng), c);
  const Circuit empty = prune_gates(c, 1.0, rng);
  EXPECT_TRUE(empty.gates.empty());
  EXPECT_EQ(empty.theta_count, 0);
  EXPECT_THROW(prune_gates(c, 1.5, rng), ConfigError);
}

TEST(Prune, SurvivorCountIsBinomial) {
  Rng rng = make_rng(2, "prune");
  const Circuit c = testing::random_circuit(3, 50, 2, 10, rng);
  long kept = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) kept += static_cast<long>(prune_gates(c, 0.4, rng).gates.size());
  const double n = 50.0 * trials;
  EXPECT_LT(std::abs(kept - 0.6 * n), 5.0 * std::sqrt(n * 0.24));
}

TEST(Prune, ResultIsValidSubsequence) {
  Rng rng = make_rng(3, "prune");
  for (int t = 0; t < 100; ++t) {
    const Circuit c = testing::random_circuit(4, 25, 3, 8, rng);
    const Circuit p = prune_gates(c, 0.3, rng);
    EXPECT_TRUE(is_subsequence(p, c));
    EXPECT_NO_THROW(validate(p));
    int next = 0;
    for (const Gate& g : p.gates) {
      if (g.is_variational()) {
        EXPECT_LT(std::get<VariationalParam>(*g.role).theta_index, p.theta_count);
      }
      next += g.is_variational() ? 1 : 0;
    }
    EXPECT_LE(p.theta_count, next);
  }
}

TEST(AppendLayer, GateCountsPerFamily) {
  const DeviceModel d = linear_chain_device(5);
  const SamplerConfig cfg = config(5);
  Rng rng = make_rng(4, "append");
  const Circuit hea = sample_family(Family::Hea, d, cfg, rng);
  const Circuit hea2 = append_layer(hea, d, cfg, rng);
  EXPECT_EQ(hea2.gates.size(), hea.gates.size() + 5 + 4);
  EXPECT_TRUE(is_subsequence(hea, hea2));

  const Circuit cov = sample_family(Family::Covariant, d, cfg, rng);
  EXPECT_EQ(append_layer(cov, d, cfg, rng).gates.size(), cov.gates.size() + 4 + 10);

  const Circuit un = sample_family(Family::Unstructured, d, cfg, rng);
  EXPECT_EQ(append_layer(un, d, cfg, rng).gates.size(), un.gates.size() + 5);
}

TEST(AppendLayer, KeepsCircuitBandwidth) {
  const DeviceModel d = linear_chain_device(4);
  SamplerConfig cfg = config(4);
  cfg.data_fraction = 1.0;
  Rng rng = make_rng(5, "append");
  for (int t = 0; t < 20; ++t) {
    const Circuit c = sample_family(Family::Hea, d, cfg, rng);
    const double scale = circuit_data_scale(c, -1.0);
    for (const Gate& g : append_layer(c, d, cfg, rng).gates) {
      if (g.is_data()) {
        EXPECT_EQ(std::get<DataParam>(*g.role).scale, scale);
      }
    }
  }
  EXPECT_EQ(circuit_data_scale(make_circuit(1, {}), 0.5), 0.5);
}

TEST(Evolve, ElitismAndPopulationLayout) {
  const DeviceModel d = linear_chain_device(4);
  const SamplerConfig cfg = config(4);
  const auto parents_all = sample_population(d, cfg, 5, 9);
  EvolveConfig ec;
  ec.population_size = 150;
  const auto next = evolve_population(parents_all, d, cfg, ec, 9, 1000);
  ASSERT_EQ(next.size(), 150u);
  for (std::size_t p = 0; p < 5; ++p) EXPECT_EQ(next[p], parents_all[p]);
  std::set<std::uint64_t> ids;
  for (std::size_t i = 5; i < next.size(); ++i) {
    EXPECT_EQ(next[i].id, 1000 + (i - 5));
    EXPECT_TRUE(check_hardware_aware(next[i], d));
    ids.insert(next[i].id);
  }
  EXPECT_EQ(ids.size(), 145u);
  // children of parent p keep its family
  for (std::size_t i = 5; i < 35; ++i) EXPECT_EQ(next[i].family, parents_all[0].family);
  EXPECT_EQ(evolve_population(parents_all, d, cfg, ec, 9, 1000), next);
}

TEST(Evolve, WithoutElitismOnlyChildren) {
  const DeviceModel d = linear_chain_device(4);
  const SamplerConfig cfg = config(4);
  const auto parents = sample_population(d, cfg, 3, 2);
  EvolveConfig ec;
  ec.population_size = 10;
  ec.elitism = false;
  const auto next = evolve_population(parents, d, cfg, ec, 2, 50);
  ASSERT_EQ(next.size(), 10u);
  for (const Circuit& c : next) EXPECT_GE(c.id, 50u);
  EXPECT_THROW(evolve_population({}, d, cfg, ec, 2, 50), Error);
}

TEST(Evolve, NoMutationMeansParentPlusOneBlock) {
  const DeviceModel d = linear_chain_device(4);
  const SamplerConfig cfg = config(4);
  const auto parents = sample_population(d, cfg, 4, 3);
  EvolveConfig ec;
  ec.population_size = 8;
  ec.mutate_fraction = 0.0;
  const auto next = evolve_population(parents, d, cfg, ec, 3, 10);
  for (std::size_t i = 4; i < next.size(); ++i) {
    const Circuit& parent = parents[(i - 4) / 2];  // quota ceil(8 / 4) = 2 children per parent
    EXPECT_GT(next[i].gates.size(), parent.gates.size());
    EXPECT_TRUE(std::equal(parent.gates.begin(), parent.gates.end(), next[i].gates.begin()));
  }
}

}  // namespace
}  // namespace quprofs
