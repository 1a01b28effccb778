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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dcrs {

struct ParallelOptions {
  unsigned workers = 1;
  /// Trials per chunk. Chunk boundaries depend only on this value, never on
  /// the worker count, which keeps merged results bit-identical.
  std::uint64_t chunk_size = 2048;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& o) noexcept {
    add(o.sum_);
    add(o.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Count, sum and sum of squares of a scalar per-trial statistic.
struct RunningMoments {
  std::uint64_t n = 0;
  CompensatedSum sum;
  CompensatedSum sum_sq;

  void add(double x) noexcept {
    ++n;
    sum.add(x);
    sum_sq.add(x * x);
  }
  void merge(const RunningMoments& o) noexcept {
    n += o.n;
    sum.merge(o.sum);
    sum_sq.merge(o.sum_sq);
  }
  double mean() const noexcept { return n ? sum.value() / static_cast<double>(n) : 0.0; }
  /// Unbiased sample variance.
  double variance() const noexcept {
    if (n < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq.value() - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::max(0.0, v);
  }
  double stderr_of_mean() const noexcept {
    return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n));
  }
};

/// Runs trials [first, first + count) in fixed-size chunks. `body(begin, end)`
/// returns the accumulator of one chunk; chunk results are merged with
/// `merge(into, from)` in chunk order, so the outcome does not depend on the
/// number of workers. The first exception thrown by a chunk is rethrown.
template <class Acc, class Body, class Merge>
Acc run_chunks(std::uint64_t first, std::uint64_t count, const ParallelOptions& opts, Body&& body,
               Merge&& merge) {
  const std::uint64_t chunk = std::max<std::uint64_t>(1, opts.chunk_size);
  const std::uint64_t nchunks = (count + chunk - 1) / chunk;
  std::vector<Acc> parts(nchunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      const std::uint64_t begin = first + c * chunk;
      const std::uint64_t end = std::min(first + count, begin + chunk);
      try {
        parts[c] = body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(nchunks);
        return;
      }
    }
  };

  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, opts.workers), nchunks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  Acc total{};
  for (const Acc& p : parts) merge(total, p);
  return total;
}

}  // namespace dcrs
