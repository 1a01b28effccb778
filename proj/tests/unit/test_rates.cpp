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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"
#include "dcrs/rates.hpp"
#include "dcrs/rng.hpp"

using namespace dcrs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Codebook cube_split_8() {
  CubeSplitParams p;
  p.t = 2;
  p.bits_per_coord = {1, 1};
  return build_cubesplit(p);
}

Codebook random_codebook(std::size_t n, Index t, Index m, std::uint64_t seed) {
  std::vector<StiefelPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianSource rng(seed, i);
    pts.push_back(random_stiefel(t, m, rng));
  }
  return Codebook(std::move(pts), Method::External);
}

// log p(Y | X) for Y = sqrt(T/M) X H + sigma V, up to the constant common to all X,
// with the T x T covariance inverted and its determinant taken directly.
double log_likelihood(const CMat& y, const StiefelPoint& x, double sigma_v2) {
  const Index t = x.t();
  const double ratio = static_cast<double>(t) / static_cast<double>(x.m());
  const CMat cov = ratio * x.mat() * x.mat().adjoint() + sigma_v2 * CMat::Identity(t, t);
  const Eigen::PartialPivLU<CMat> lu(cov);
  const double logdet = std::log(std::abs(lu.determinant()));
  return -static_cast<double>(y.cols()) * logdet - (y.adjoint() * lu.solve(y)).trace().real();
}

RateOptions fixed_trials(std::uint64_t n, std::uint64_t seed) {
  RateOptions o;
  o.max_trials = n;
  o.min_trials = n;
  o.round_trials = n;
  o.stderr_target = 0.0;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("eta basics") {
  const Codebook cb = random_codebook(4, 4, 2, 1);
  GaussianSource rng(2, 0);
  const CMat y = rng.complex_normal(4, 2);
  CHECK(eta(y, cb[1], cb[1], 0.3) == 0.0);

  CMat e1 = CMat::Zero(3, 1), e2 = CMat::Zero(3, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  const CMat aligned = std::sqrt(3.0) * e1 * cplx(0.4, -1.2);
  CHECK(eta(aligned, StiefelPoint(e1), StiefelPoint(e2), 0.1) < 0.0);
  CHECK_THROWS_AS(eta(y, cb[0], cb[1], 0.0), DomainError);
}

TEST_CASE("eta equals the direct log-likelihood ratio") {
  int checked = 0;
  for (auto [t, m] : {std::pair<Index, Index>{2, 1}, {3, 1}, {4, 1}, {4, 2}, {3, 2}}) {
    for (std::uint64_t s = 0; s < 25; ++s) {
      GaussianSource rng(3 + static_cast<std::uint64_t>(t * 10 + m), s);
      const StiefelPoint xi = random_stiefel(t, m, rng);
      const StiefelPoint xj = random_stiefel(t, m, rng);
      const double s2 = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
      const CMat h = rng.complex_normal(m, 2);
      const CMat y = std::sqrt(double(t) / double(m)) * xi.mat() * h + std::sqrt(s2) * rng.complex_normal(t, 2);
      const double direct = log_likelihood(y, xj, s2) - log_likelihood(y, xi, s2);
      CHECK_THAT(eta(y, xi, xj, s2), WithinRel(direct, 1e-8));
      ++checked;
    }
  }
  CHECK(checked == 125);
}

TEST_CASE("rank-M inverse and determinant closed forms") {
  CMat x = CMat::Zero(2, 1);
  x(0, 0) = 1.0;
  const InverseCheck hand = simplified_inverse_check(StiefelPoint(x), 1.0);
  CHECK(hand.inverse_deviation < 1e-12);
  CHECK_THAT(hand.determinant, WithinAbs(3.0, 1e-12));

  for (std::uint64_t s = 0; s < 100; ++s) {
    GaussianSource rng(4, s);
    const Index t = 2 + static_cast<Index>(s % 4);
    const Index m = 1 + static_cast<Index>(s % static_cast<std::uint64_t>(t));
    const StiefelPoint p = random_stiefel(t, m, rng);
    const double s2 = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
    const InverseCheck c = simplified_inverse_check(p, s2);
    CHECK(c.inverse_deviation < 1e-10 * std::max(1.0, 1.0 / s2));
    CHECK(c.determinant_deviation < 1e-10);
  }
}

TEST_CASE("Grassmann rate: fast and general paths agree") {
  const Codebook cb = cube_split_8();
  const RateOptions opts = fixed_trials(300, 5);
  const RateEstimate a = grassmann_rate(cb, 1, 0.2, opts, GrassmannPath::Auto);
  const RateEstimate b = grassmann_rate(cb, 1, 0.2, opts, GrassmannPath::General);
  CHECK_THAT(a.mean, WithinAbs(b.mean, 1e-10));
  CHECK(a.trials == 300);
}

TEST_CASE("Grassmann rate limits") {
  const Codebook cb = cube_split_8();
  const RateEstimate hi = grassmann_rate(cb, 1, 1e-4, fixed_trials(2000, 6));
  CHECK_THAT(hi.mean, WithinAbs(1.5, 0.01));
  const RateEstimate lo = grassmann_rate(cb, 1, 100.0, fixed_trials(2000, 6));
  CHECK(lo.mean < 0.1);
  CHECK(lo.mean > -3.0 * lo.std_error);

  const Codebook m2 = random_codebook(16, 4, 2, 7);
  for (double s2 : {10.0, 1.0, 0.1, 0.01}) {
    const RateEstimate r = grassmann_rate(m2, 2, s2, fixed_trials(300, 8));
    CHECK(r.mean <= 1.0 + 3.0 * r.std_error);
    CHECK(r.mean >= -3.0 * r.std_error);
  }
}

TEST_CASE("Grassmann rate is non-decreasing in SNR on common draws") {
  const Codebook cb = random_codebook(16, 4, 1, 9);
  double prev = -1.0, prev_se = 0.0;
  for (double snr : {-10.0, 0.0, 10.0, 20.0}) {
    const RateEstimate r = grassmann_rate(cb, 1, std::pow(10.0, -snr / 10.0), fixed_trials(1000, 10));
    CHECK(r.mean >= prev - 2.0 * std::max(r.std_error, prev_se));
    prev = r.mean;
    prev_se = r.std_error;
  }
}

TEST_CASE("QAM alphabet") {
  const QamConstellation q = QamConstellation::square(16);
  REQUIRE(q.symbols.size() == 16);
  double e = 0.0;
  for (cplx s : q.symbols) e += std::norm(s);
  CHECK_THAT(e / 16.0, WithinAbs(1.0, 1e-12));
}

TEST_CASE("coherent rate with perfect CSI") {
  const QamConstellation q16 = QamConstellation::square(16);
  const RateEstimate hi = coherent_rate_pcsi(q16, 1, 1, 1e-4, fixed_trials(2000, 11));
  CHECK_THAT(hi.mean, WithinAbs(4.0, 0.02));
  const RateEstimate lo = coherent_rate_pcsi(q16, 1, 1, 1e3, fixed_trials(2000, 11));
  CHECK(lo.mean < 0.01);

  const QamConstellation q4 = QamConstellation::square(4);
  const RateEstimate m2 = coherent_rate_pcsi(q4, 2, 2, 1e-4, fixed_trials(500, 12));
  CHECK_THAT(m2.mean, WithinAbs(4.0, 0.02));
}

TEST_CASE("coherent rate under CSI error") {
  const QamConstellation q16 = QamConstellation::square(16);
  const RateOptions opts = fixed_trials(1000, 13);
  const RateEstimate pcsi = coherent_rate_pcsi(q16, 1, 1, 0.05, opts);
  const RateEstimate zero = coherent_rate_csi_error(q16, 1, 1, 0.05, 0.0, opts);
  CHECK(zero.mean == pcsi.mean);

  for (double s2 : {1.0, 0.01, 1e-4}) {
    const RateEstimate none = coherent_rate_csi_error(q16, 1, 1, s2, 1.0, opts);
    CHECK(none.mean < 0.05);
  }

  double prev = 1e9, prev_se = 0.0;
  for (double beta : {0.0, 0.1, 0.3, 0.6, 1.0}) {
    const RateEstimate r = coherent_rate_csi_error(q16, 1, 1, 0.01, beta, opts);
    CHECK(r.mean <= prev + 2.0 * std::max(r.std_error, prev_se));
    prev = r.mean;
    prev_se = r.std_error;
  }
  CHECK_THROWS_AS(coherent_rate_csi_error(q16, 1, 1, 0.1, 1.2, opts), DomainError);
}

TEST_CASE("early stopping and worker independence") {
  const QamConstellation q16 = QamConstellation::square(16);
  RateOptions opts;
  opts.max_trials = 4000;
  opts.min_trials = 200;
  opts.round_trials = 200;
  opts.stderr_target = 0.05;
  opts.seed = 14;
  opts.parallel.chunk_size = 64;
  const RateEstimate a = coherent_rate_pcsi(q16, 1, 1, 0.1, opts);
  CHECK(a.trials < opts.max_trials);
  CHECK(a.std_error < 0.05);
  opts.parallel.workers = 3;
  const RateEstimate b = coherent_rate_pcsi(q16, 1, 1, 0.1, opts);
  CHECK(a.mean == b.mean);
  CHECK(a.trials == b.trials);
}

TEST_CASE("slot aggregation") {
  RateEstimate rg, re;
  rg.mean = 2.0;
  rg.std_error = 0.1;
  re.mean = 4.0;
  re.std_error = 0.2;
  const RateEstimate total = total_slot_rate(rg, re);
  CHECK_THAT(total.mean, WithinAbs(48.0, 1e-12));
  CHECK_THAT(total.std_error, WithinAbs(std::sqrt(16.0 * 0.01 + 100.0 * 0.04), 1e-12));
  CHECK_THAT(per_symbol(total).mean, WithinAbs(48.0 / 14.0, 1e-12));

  const RateEstimate training = training_total_rate(re);
  CHECK_THAT(training.mean, WithinAbs(40.0, 1e-12));
  CHECK_THAT(training.std_error, WithinAbs(2.0, 1e-12));

  RateEstimate zero;
  CHECK(total_slot_rate(zero, zero).mean == 0.0);
  CHECK_THROWS_AS(total_slot_rate(rg, re, FrameLayout{0, 0}), DomainError);
}
