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
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace quprofs {

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter binding failed (index out of range on x or theta).
class BindError : public Error {
 public:
  using Error::Error;
};

/// Circuit violates a structural invariant.
class CircuitError : public Error {
 public:
  using Error::Error;
};

/// Operation does not support the gate it was handed.
class UnsupportedGateError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range configuration / input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Circuit does not fit the device it is scored against.
class IncompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Numerical degeneracy (zero-norm kernel, empty input, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Stable 64-bit seed for one unit of work. Depends only on its arguments,
/// so results do not change with evaluation order or worker count.
inline constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view stage,
                                           std::uint64_t task_id = 0) {
  std::uint64_t h = detail::splitmix64(run_seed);
  h = detail::splitmix64(h ^ detail::fnv1a(stage));
  h = detail::splitmix64(h ^ task_id);
  return h;
}

inline Rng make_rng(std::uint64_t run_seed, std::string_view stage, std::uint64_t task_id = 0) {
  return Rng(derive_seed(run_seed, stage, task_id));
}

/// Uniform real in [lo, hi). Implemented directly on the engine output so the
/// stream is identical across standard library implementations.
inline double uniform_real(Rng& rng, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform_real(rng) < p; }

/// Standard normal via Box-Muller.
inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = uniform_real(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_real(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace quprofs
