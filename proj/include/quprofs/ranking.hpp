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
 * ranking.hpp
 *
 * KTA filtering and hybrid rank aggregation.
 *
 * Ranks run 1..Z with Z the best under each proxy's direction. A circuit's
 * aggregate score is
 *
 *   s(j) = sum_{k in best}  log(r_kj / Z)
 *        + sum_{k in mid}   log(r_kj (Z + 1 - r_kj) / Z)
 *
 * "best" proxies reward the top rank, "mid" proxies reward ranks near the
 * middle and are symmetric under r -> Z + 1 - r.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "quprofs/common.hpp"
#include "quprofs/proxies.hpp"

namespace quprofs {

enum class Direction { HigherBetter, LowerBetter };
enum class ProxyGroup { Best, Mid, Excluded };

inline std::string_view to_string(Direction d) { return d == Direction::HigherBetter ? "higher" : "lower"; }
inline std::string_view to_string(ProxyGroup g) {
  return g == ProxyGroup::Best ? "best" : g == ProxyGroup::Mid ? "mid" : "excluded";
}

/// Permutation of 1..Z; the best score under `dir` gets Z. Equal scores:
/// the lower index gets the higher rank.
inline std::vector<int> assign_ranks(std::span<const double> scores, Direction dir) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw Error("assign_ranks: NaN score at position " + std::to_string(i));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // worst first; among ties the higher index is placed first (lower rank)
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) {
      return dir == Direction::HigherBetter ? scores[a] < scores[b] : scores[a] > scores[b];
    }
    return a > b;
  });
  std::vector<int> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = static_cast<int>(pos + 1);
  return ranks;
}

struct RankTable {
  int z = 0;
  std::vector<std::string> proxy_names;
  std::vector<std::vector<int>> ranks;  // ranks[k][j]: rank of candidate j under proxy k
  std::vector<Direction> directions;
  std::vector<ProxyGroup> groups;

  void validate() const {
    if (ranks.size() != groups.size()) throw Error("rank table: groups do not match proxies");
    for (const auto& r : ranks) {
      if (static_cast<int>(r.size()) != z) throw Error("rank table: rank vector length != Z");
      std::vector<int> sorted = r;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < z; ++i) {
        if (sorted[static_cast<std::size_t>(i)] != i + 1) throw Error("rank table: ranks are not a permutation of 1..Z");
      }
    }
  }
};

/// Contribution of one rank to the aggregate score.
inline double rank_term(int r, int z, ProxyGroup g) {
  switch (g) {
    case ProxyGroup::Best: return std::log(static_cast<double>(r) / z);
    case ProxyGroup::Mid: return std::log(static_cast<double>(r) * static_cast<double>(z + 1 - r) / z);
    case ProxyGroup::Excluded: return 0.0;
  }
  return 0.0;
}

/// Aggregate scores. Each score is log(P / Z^m) with P an integer product of
/// rank factors and m the number of aggregated proxies; P is formed exactly
/// (while it fits in 128 bits) so candidates with equal products get
/// bit-identical scores and the index tie-break in top_k applies.
inline std::vector<double> aggregate(const RankTable& t) {
  if (t.z < 2) throw Error("aggregate: need at least 2 candidates, got " + std::to_string(t.z));
  t.validate();
  __extension__ using Wide = unsigned __int128;
  int m = 0;
  for (ProxyGroup g : t.groups) m += g == ProxyGroup::Excluded ? 0 : 1;
  const long double log_z = std::log(static_cast<long double>(t.z));
  std::vector<double> s(static_cast<std::size_t>(t.z), 0.0);
  for (int j = 0; j < t.z; ++j) {
    Wide product = 1;
    bool exact = true;
    for (std::size_t k = 0; k < t.ranks.size() && exact; ++k) {
      const auto r = static_cast<Wide>(t.ranks[k][j]);
      Wide factor = 1;
      switch (t.groups[k]) {
        case ProxyGroup::Best: factor = r; break;
        case ProxyGroup::Mid: factor = r * static_cast<Wide>(t.z + 1 - t.ranks[k][j]); break;
        case ProxyGroup::Excluded: factor = 1; break;
      }
      exact = !__builtin_mul_overflow(product, factor, &product);
    }
    if (exact) {
      s[static_cast<std::size_t>(j)] = static_cast<double>(std::log(static_cast<long double>(product)) - m * log_z);
    } else {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.ranks.size(); ++k) acc += rank_term(t.ranks[k][j], t.z, t.groups[k]);
      s[static_cast<std::size_t>(j)] = acc;
    }
  }
  return s;
}

/// Indices of the k largest scores, best first; ties go to the lower index.
inline std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) {
    throw Error("top_k: k = " + std::to_string(k) + " outside [1, " + std::to_string(scores.size()) + "]");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  return order;
}

/// Keeps ceil(keep_fraction * Z) candidates with the highest KTA; ties go to
/// the lower id. Returns positions into the input, ascending.
inline std::vector<std::size_t> kta_filter(std::span<const std::uint64_t> ids, std::span<const double> kta_scores,
                                           double keep_fraction) {
  if (ids.empty()) throw Error("kta_filter: empty population");
  if (ids.size() != kta_scores.size()) throw Error("kta_filter: ids and scores differ in length");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("kta_filter: keep_fraction must be in (0,1]");
  for (double s : kta_scores) {
    if (!std::isfinite(s)) throw Error("kta_filter: non-finite KTA score");
  }
  const auto keep = static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(ids.size()) - 1e-9));
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (kta_scores[a] != kta_scores[b]) return kta_scores[a] > kta_scores[b];
    return ids[a] < ids[b];
  });
  order.resize(std::max<std::size_t>(keep, 1));
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------
// Proxy vectors -> rank table

struct ProxySpec {
  std::string name;
  Direction direction = Direction::HigherBetter;
  ProxyGroup group = ProxyGroup::Excluded;
};

struct RankingConfig {
  std::vector<ProxySpec> proxies{
      {"concentration", Direction::HigherBetter, ProxyGroup::Best},
      {"hw_fidelity", Direction::HigherBetter, ProxyGroup::Best},
      {"expressivity_kl", Direction::HigherBetter, ProxyGroup::Mid},
      {"led", Direction::HigherBetter, ProxyGroup::Mid},
      {"cnot_count", Direction::HigherBetter, ProxyGroup::Mid},
      {"param_count", Direction::HigherBetter, ProxyGroup::Mid},
  };

  void validate() const {
    for (const auto& p : proxies) {
      if (p.name == "kta" && p.group != ProxyGroup::Excluded) {
        throw ConfigError("ranking: kta is the filter score and cannot be aggregated");
      }
    }
  }
};

inline double proxy_value(const ProxyVector& p, const std::string& name) {
  if (name == "kta") return p.kta;
  if (name == "concentration") return p.concentration;
  if (name == "expressivity_kl") return p.expressivity_kl;
  if (name == "led") return p.led;
  if (name == "hw_fidelity") return p.hw_fidelity;
  if (name == "cnot_count") return p.cnot_count;
  if (name == "param_count") return p.param_count;
  if (name == "depth") return p.depth;
  throw ConfigError("unknown proxy '" + name + "'");
}

inline RankTable build_rank_table(std::span<const ProxyVector> candidates, const RankingConfig& cfg) {
  cfg.validate();
  RankTable t;
  t.z = static_cast<int>(candidates.size());
  for (const auto& spec : cfg.proxies) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& p : candidates) scores.push_back(proxy_value(p, spec.name));
    t.proxy_names.push_back(spec.name);
    t.ranks.push_back(assign_ranks(scores, spec.direction));
    t.directions.push_back(spec.direction);
    t.groups.push_back(spec.group);
  }
  return t;
}

}  // namespace quprofs
