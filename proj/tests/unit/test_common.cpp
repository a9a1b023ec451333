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

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "quprofs/common.hpp"
#include "quprofs/parallel.hpp"

namespace quprofs {
namespace {

TEST(DeriveSeed, IsAPureFunctionOfItsArguments) {
  EXPECT_EQ(derive_seed(42, "theta", 7), derive_seed(42, "theta", 7));
  EXPECT_NE(derive_seed(42, "theta", 7), derive_seed(42, "theta", 8));
  EXPECT_NE(derive_seed(42, "theta", 7), derive_seed(42, "expr", 7));
  EXPECT_NE(derive_seed(42, "theta", 7), derive_seed(43, "theta", 7));
}

TEST(DeriveSeed, DistinctTasksGetDistinctSeeds) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t id = 0; id < 10000; ++id) seen.insert(derive_seed(1, "sample", id));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Rng, UniformRealStaysInRange) {
  Rng rng = make_rng(3, "test");
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_real(rng, -2.0, 5.0);
    ASSERT_GE(u, -2.0);
    ASSERT_LT(u, 5.0);
  }
}

TEST(Rng, UniformIndexIsUnbiased) {
  // chi-square over 7 cells, 70000 draws; 99.9% quantile of chi2(6) is 22.46
  Rng rng = make_rng(5, "test");
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[uniform_index(rng, 7)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
}

TEST(Rng, StandardNormalMoments) {
  Rng rng = make_rng(9, "test");
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Rng, BernoulliRate) {
  Rng rng = make_rng(11, "test");
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += bernoulli(rng, 0.3) ? 1 : 0;
  EXPECT_NEAR(hits, 0.3 * n, 5.0 * std::sqrt(n * 0.3 * 0.7));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (int workers : {1, 2, 4}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  for (int workers : {1, 3}) {
    try {
      parallel_for(50, workers, [](std::size_t i) {
        if (i == 17 || i == 31) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
}

}  // namespace
}  // namespace quprofs
