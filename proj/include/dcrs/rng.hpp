// SPDX-License-Identifier: Apache-2.0
//
// dcrs - data-carrying reference signals on the Grassmann manifold
// Copyright (C) 2026 The dcrs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include "dcrs/types.hpp"

namespace dcrs {

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent master seed for a named purpose ("nmse", "rate-g", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

/// Counter-based bit generator. Output n of stream s under seed k is a pure
/// function of (k, s, n), so any trial can be regenerated without replaying
/// earlier ones and results do not depend on how trials are scheduled.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(seed ^ mix64(stream ^ 0x6a09e667f3bcc909ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Gaussian / uniform draws on top of a CounterRng substream.
class GaussianSource {
 public:
  GaussianSource(std::uint64_t seed, std::uint64_t stream)
      : rng_(seed, stream), normal_(0.0, 1.0) {}

  double normal() { return normal_(rng_); }

  /// CN(0, 1): independent N(0, 1/2) real and imaginary parts.
  cplx complex_normal() {
    constexpr double kHalfStd = 0.70710678118654752440;
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {kHalfStd * re, kHalfStd * im};
  }

  CMat complex_normal(Index rows, Index cols) {
    CMat out(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) out(r, c) = complex_normal();
    return out;
  }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

 private:
  CounterRng rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace dcrs
