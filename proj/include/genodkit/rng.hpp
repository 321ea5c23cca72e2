// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace genodkit {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Derives an independent stream seed from a base seed and a stream label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

// Portable seeded generator. std::mt19937_64 output is fully specified by the
// standard; the distributions below avoid the implementation-defined
// std::*_distribution types so results match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform in [0, 1).
  double uniform01();

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return p > 0.0 && uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace genodkit
