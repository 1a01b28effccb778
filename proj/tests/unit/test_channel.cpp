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

#include "dcrs/channel.hpp"
#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"
#include "dcrs/rng.hpp"

using namespace dcrs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Codebook random_codebook(std::size_t n, Index t, Index m, std::uint64_t seed) {
  std::vector<StiefelPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianSource rng(seed, i);
    pts.push_back(random_stiefel(t, m, rng));
  }
  return Codebook(std::move(pts), Method::External);
}

}  // namespace

TEST_CASE("noise variance from SNR") {
  CHECK_THAT(sigma_v2_from_snr_db(0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(sigma_v2_from_snr_db(10.0), WithinRel(0.1, 1e-14));
  CHECK_THAT(sigma_v2_from_snr_db(-20.0), WithinRel(100.0, 1e-14));
}

TEST_CASE("channel draws have unit average power per entry") {
  double acc = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    GaussianSource rng(1, static_cast<std::uint64_t>(k));
    acc += draw_channel(2, 2, 0.0, rng).h.squaredNorm();
  }
  CHECK_THAT(acc / draws / 4.0, WithinAbs(1.0, 0.02));
}

TEST_CASE("transmit_block hand example and power accounting") {
  CMat x = CMat::Zero(2, 1);
  x(0, 0) = 1.0;
  ChannelRealization ch;
  ch.h = CMat::Constant(1, 1, 2.0);
  ch.sigma_v = 0.0;
  GaussianSource rng(2, 0);
  const CMat y = transmit_block(StiefelPoint(x), ch, rng);
  CHECK_THAT(std::abs(y(0, 0) - cplx(2.0 * std::sqrt(2.0), 0.0)), WithinAbs(0.0, 1e-15));
  CHECK(std::abs(y(1, 0)) == 0.0);

  const Index t = 4, m = 2, n = 2;
  const double s2 = 0.5;
  const Codebook cb = random_codebook(4, t, m, 3);
  double acc = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    GaussianSource g(4, static_cast<std::uint64_t>(k));
    const ChannelRealization c = draw_channel(m, n, std::sqrt(s2), g);
    acc += transmit_block(cb[static_cast<std::size_t>(k) % 4], c, g).squaredNorm();
  }
  CHECK_THAT(acc / draws, WithinRel(static_cast<double>(t * n) * (1.0 + s2), 0.02));
}

TEST_CASE("QPSK pilot structure") {
  for (Index m : {1, 2}) {
    const CMat p = make_qpsk_pilot(4, m, 11);
    CHECK(p.rows() == 4);
    CHECK(p.cols() == m);
    CHECK_THAT(p.squaredNorm(), WithinRel(4.0, 1e-12));
    const CMat gram = p.adjoint() * p;
    CHECK((gram - (4.0 / static_cast<double>(m)) * CMat::Identity(m, m)).norm() < 1e-12);
    for (Index r = 0; r < 4; ++r)
      for (Index c = 0; c < m; ++c) CHECK_THAT(std::abs(p(r, c)), WithinRel(1.0 / std::sqrt(double(m)), 1e-12));
    CHECK(make_qpsk_pilot(4, m, 11) == p);
  }
  CHECK(make_qpsk_pilot(4, 1, 11) != make_qpsk_pilot(4, 1, 12));
}

TEST_CASE("training estimate: ZF is exact without noise, MMSE tends to ZF") {
  GaussianSource rng(5, 0);
  const CMat p = 2.0 * random_stiefel(4, 2, rng).mat();
  ChannelRealization ch = draw_channel(2, 3, 0.0, rng);
  const CMat y = transmit_pilot(p, ch, rng);
  CHECK((training_estimate(p, y, 0.0, EstimatorMode::ZF) - ch.h).cwiseAbs().maxCoeff() < 1e-12);

  const CMat noisy = y + 0.1 * rng.complex_normal(4, 3);
  const CMat zf = training_estimate(p, noisy, 1e-12, EstimatorMode::ZF);
  const CMat mmse = training_estimate(p, noisy, 1e-12, EstimatorMode::MMSE);
  CHECK((zf - mmse).cwiseAbs().maxCoeff() < 1e-8);

  CMat deficient = CMat::Zero(4, 2);
  deficient.col(0).setOnes();
  deficient.col(1).setOnes();
  CHECK_THROWS_AS(training_filter(deficient, 0.1, EstimatorMode::ZF), DegenerateInput);
}

TEST_CASE("GLRT detection") {
  const Codebook cb = random_codebook(16, 4, 1, 7);
  for (std::size_t i = 0; i < cb.size(); ++i) {
    GaussianSource rng(8, i);
    const ChannelRealization ch = draw_channel(1, 1, 0.0, rng);
    const CMat y = transmit_block(cb[i], ch, rng);
    CHECK(glrt_detect(y, cb) == i);
    CHECK(glrt_detect(cplx(-0.3, 2.1) * y, cb) == i);
  }
  CHECK(glrt_detect(CMat::Zero(4, 1), cb) == 0);
  CHECK_THROWS_AS(glrt_detect(CMat::Zero(3, 1), cb), DimensionMismatch);
}

TEST_CASE("GLRT fast path agrees with the trace form") {
  for (Index m : {1, 2}) {
    const Codebook cb = random_codebook(32, 4, m, 9 + static_cast<std::uint64_t>(m));
    int agree = 0;
    const int cases = 10000;
    for (int k = 0; k < cases; ++k) {
      GaussianSource rng(10, static_cast<std::uint64_t>(k));
      const CMat y = rng.complex_normal(4, 2);
      if (glrt_detect(y, cb) == glrt_detect_trace(y, cb)) ++agree;
      GaussianSource s(11, static_cast<std::uint64_t>(k));
      const cplx c = s.complex_normal();
      if (k < 1000) CHECK(glrt_detect(c * y, cb) == glrt_detect(y, cb));
    }
    CHECK(agree == cases);
  }
}

TEST_CASE("DC-RS estimate identities") {
  const Codebook cb = random_codebook(4, 4, 2, 13);
  GaussianSource rng(14, 0);
  const ChannelRealization ch = draw_channel(2, 2, 0.0, rng);
  const CMat y = transmit_block(cb[1], ch, rng);
  CHECK((dcrs_estimate(y, cb[1], 0.0, EstimatorMode::ZF) - ch.h).cwiseAbs().maxCoeff() < 1e-12);

  const CMat wrong = dcrs_estimate(y, cb[2], 0.0, EstimatorMode::ZF) - ch.h;
  const CMat expected = (cb[2].mat().adjoint() * cb[1].mat() - CMat::Identity(2, 2)) * ch.h;
  CHECK((wrong - expected).cwiseAbs().maxCoeff() < 1e-12);

  const double s2 = 0.3;
  const CMat noisy = y + std::sqrt(s2) * rng.complex_normal(4, 2);
  const CMat zf = dcrs_estimate(noisy, cb[1], s2, EstimatorMode::ZF);
  const CMat mmse = dcrs_estimate(noisy, cb[1], s2, EstimatorMode::MMSE);
  const double tm = 2.0;
  CHECK((mmse - zf * (tm / (tm + s2))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("DC-RS estimate error with correct detection") {
  const Index t = 4, m = 2, n = 2;
  const double s2 = 0.2;
  const Codebook cb = random_codebook(4, t, m, 15);
  double acc = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    GaussianSource rng(16, static_cast<std::uint64_t>(k));
    const std::size_t i = static_cast<std::size_t>(k) % cb.size();
    const ChannelRealization ch = draw_channel(m, n, std::sqrt(s2), rng);
    const CMat y = transmit_block(cb[i], ch, rng);
    acc += (dcrs_estimate(y, cb[i], s2, EstimatorMode::ZF) - ch.h).squaredNorm();
  }
  CHECK_THAT(acc / draws, WithinRel(s2 * m * m * n / static_cast<double>(t), 0.02));
}

TEST_CASE("normalised error floor") {
  CHECK(nmse_lower_bound(0.0, 1, 4) == 0.0);
  CHECK_THAT(nmse_lower_bound(1.0, 1, 4), WithinAbs(0.21115, 5e-6));
  CHECK_THAT(10.0 * std::log10(nmse_lower_bound(1.0, 1, 4)), WithinAbs(-6.75, 5e-3));
  double prev = 0.0;
  for (double s2 : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
    const double b = nmse_lower_bound(s2, 2, 4);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("beta and sigma_e^2 conversions") {
  CHECK_THAT(beta_from_sigma(2.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(beta_from_sigma(0.2), WithinAbs(0.43589, 5e-6));
  CHECK(beta_from_sigma(1e-12) < 1e-5);
  for (double b : {0.01, 0.2, 0.5, 0.9, 1.0}) CHECK_THAT(beta_from_sigma(sigma_from_beta(b)), WithinAbs(b, 1e-12));
  CHECK(sigma_from_beta(0.0) == 0.0);
  for (double s : {1e-6, 0.1, 0.7, 1.5, 2.0}) CHECK_THAT(sigma_from_beta(beta_from_sigma(s)), WithinAbs(s, 1e-12));
  CHECK_THROWS_AS(beta_from_sigma(0.0), DomainError);
  CHECK_THROWS_AS(beta_from_sigma(2.1), DomainError);
  CHECK_THROWS_AS(sigma_from_beta(-0.1), DomainError);
  CHECK_THROWS_AS(sigma_from_beta(1.1), DomainError);
  const CsiErrorModel e = CsiErrorModel::from_sigma_e2(0.2);
  CHECK_THAT(e.beta, WithinAbs(0.43589, 5e-6));
  CHECK_THAT(CsiErrorModel::from_beta(e.beta).sigma_e2, WithinAbs(0.2, 1e-12));
}

TEST_CASE("Gauss-Markov uncertainty") {
  GaussianSource rng(17, 0);
  const CMat h = rng.complex_normal(2, 2);
  CHECK(apply_gauss_markov(h, 0.0, rng) == h);
  CHECK_THROWS_AS(apply_gauss_markov(h, 1.5, rng), DomainError);

  const int draws = 100000;
  cplx corr = 0.0;
  double err = 0.0;
  for (int k = 0; k < draws; ++k) {
    GaussianSource g(18, static_cast<std::uint64_t>(k));
    const CMat x = g.complex_normal(1, 1);
    corr += std::conj(x(0, 0)) * apply_gauss_markov(x, 1.0, g)(0, 0);
    const CMat y = g.complex_normal(2, 2);
    err += (apply_gauss_markov(y, 0.5, g) - y).squaredNorm();
  }
  CHECK(std::abs(corr) / draws < 0.01);
  CHECK_THAT(err / draws / 4.0, WithinRel(2.0 * (1.0 - std::sqrt(0.75)), 0.02));
}

TEST_CASE("estimator names") {
  CHECK(estimator_from_string("zf") == EstimatorMode::ZF);
  CHECK(estimator_from_string(to_string(EstimatorMode::MMSE)) == EstimatorMode::MMSE);
  CHECK_THROWS(estimator_from_string("lmmse-ish"));
}
