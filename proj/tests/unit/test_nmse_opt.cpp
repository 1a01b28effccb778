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
#include <numbers>

#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"
#include "dcrs/nmse_opt.hpp"
#include "dcrs/rng.hpp"

using namespace dcrs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CMat column(std::initializer_list<cplx> v) {
  CMat x(static_cast<Index>(v.size()), 1);
  Index k = 0;
  for (cplx z : v) x(k++, 0) = z;
  return x;
}

std::vector<StiefelPoint> random_points(std::size_t n, Index t, Index m, std::uint64_t seed) {
  std::vector<StiefelPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianSource rng(seed, i);
    out.push_back(random_stiefel(t, m, rng));
  }
  return out;
}

// Pascal's triangle in exact integer arithmetic.
std::uint64_t pascal(int n, int k) {
  std::vector<std::uint64_t> row{1};
  for (int r = 1; r <= n; ++r) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(r) + 1, 1);
    for (int c = 1; c < r; ++c) next[c] = row[c - 1] + row[c];
    row = std::move(next);
  }
  return row[static_cast<std::size_t>(k)];
}

// Rotation objective for M = 1 with explicit phases, evaluated pair by pair.
double phase_objective(const std::vector<StiefelPoint>& x, const std::vector<double>& theta) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const cplx g = (x[i].mat().adjoint() * x[j].mat())(0, 0);
      const double d = 1.0 - std::norm(g);
      const cplx rot = std::polar(1.0, theta[j] - theta[i]) * g;
      total += std::norm(1.0 - rot) / d;
    }
  return total;
}

}  // namespace

TEST_CASE("pairwise error probability hand values") {
  const StiefelPoint e1(column({1, 0})), e2(column({0, 1}));
  const StiefelPoint half(column({std::sqrt(0.5), std::sqrt(0.5)}));
  CHECK_THAT(pairwise_error_prob(e1, half, 0.1, 1), WithinRel(0.2, 1e-12));
  CHECK_THAT(pairwise_error_prob(e1, e2, 0.1, 1), WithinRel(0.1, 1e-12));
  CHECK_THAT(pairwise_denominator(e1, half), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(pairwise_error_prob(e1, StiefelPoint(column({cplx(0, 1), 0})), 0.1, 1), SingularPair);
}

TEST_CASE("binomial factor against exact integers") {
  for (int n = 0; n <= 30; ++n)
    for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == static_cast<double>(pascal(n, k)));
  CHECK(binomial(7, 4) == 35.0);
}

TEST_CASE("pairwise error probability general formula for M = N = 2") {
  const auto pts = random_points(2, 4, 2, 5);
  const double s2 = 0.05;
  const CMat g = pts[0].mat().adjoint() * pts[1].mat();
  const double det = (CMat::Identity(2, 2) - g * g.adjoint()).determinant().real();
  const double expected = std::pow(s2, 4) * static_cast<double>(pascal(7, 4)) / (det * det);
  CHECK_THAT(pairwise_error_prob(pts[0], pts[1], s2, 2), WithinRel(expected, 1e-10));
  CHECK_THAT(pairwise_error_prob(pts[1], pts[0], s2, 2), WithinRel(expected, 1e-10));
}

TEST_CASE("pairwise denominator is symmetric and rotation invariant") {
  const auto pts = random_points(2, 4, 2, 7);
  GaussianSource rng(8, 0);
  const CMat u = random_stiefel(2, 2, rng).mat();
  const CMat w = random_stiefel(2, 2, rng).mat();
  const double d = pairwise_denominator(pts[0], pts[1]);
  CHECK_THAT(pairwise_denominator(pts[1], pts[0]), WithinAbs(d, 1e-14));
  CHECK_THAT(pairwise_denominator(pts[0].rotated(u), pts[1].rotated(w)), WithinAbs(d, 1e-13));
}

TEST_CASE("union bound examples") {
  const Codebook two({StiefelPoint(column({1, 0})), StiefelPoint(column({0, 1}))}, Method::External);
  CHECK_THAT(union_bound_ser(two, 0.1, 1), WithinRel(0.1, 1e-12));

  const Codebook cb(random_points(16, 4, 1, 3), Method::External);
  double prev = std::numeric_limits<double>::infinity();
  for (double snr = -10.0; snr <= 30.0; snr += 2.5) {
    const double s2 = std::pow(10.0, -snr / 10.0);
    const double ub = union_bound_ser(cb, s2, 2);
    CHECK(ub < prev);
    prev = ub;
  }

  const PairwiseErrorTable table = pairwise_error_table(cb, 0.1, 1);
  CHECK((table.p - table.p.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(table.p.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(table.p.minCoeff() >= 0.0);
  CHECK_THAT(union_bound_ser(cb, 0.1, 1), WithinRel(table.p.sum() / 16.0, 1e-12));
}

TEST_CASE("predicted channel error examples") {
  const Codebook two({StiefelPoint(column({1, 0})), StiefelPoint(column({0, 1}))}, Method::External);
  const NmsePrediction p = predicted_channel_error(two, 0.1, 1, 1.0);
  CHECK_THAT(p.noise_term, WithinRel(0.05, 1e-12));
  CHECK_THAT(p.error_term, WithinRel(0.1, 1e-12));
  CHECK_THAT(p.total(), WithinRel(0.15, 1e-12));
  CHECK(p.valid);

  const NmsePrediction tiny = predicted_channel_error(two, 0.1, 1, 1e-12);
  CHECK_THAT(tiny.total(), WithinRel(0.05, 1e-9));

  const Codebook cb(random_points(8, 4, 2, 4), Method::External);
  const NmsePrediction q = predicted_channel_error(cb, 0.01, 2, 0.5);
  CHECK_THAT(q.noise_term, WithinRel(0.01 * 4.0 * 2.0 / 4.0, 1e-12));
  CHECK(q.total() >= q.noise_term);

  // Very low SNR pushes kappa * SER past 1.
  CHECK_FALSE(predicted_channel_error(cb, 100.0, 2, 1.0).valid);
  CHECK_THROWS(predicted_channel_error(cb, 0.1, 2, 0.0));
  CHECK_THROWS(predicted_channel_error(cb, 0.1, 2, 1.5));
}

TEST_CASE("E||A H||^2 = N ||A||^2 for i.i.d. unit-variance H") {
  GaussianSource rng(12, 0);
  const CMat a = rng.complex_normal(2, 2);
  const int n_rx = 3;
  const int draws = 100000;
  double acc = 0.0;
  for (int k = 0; k < draws; ++k) {
    GaussianSource h(13, static_cast<std::uint64_t>(k));
    acc += (a * h.complex_normal(2, n_rx)).squaredNorm();
  }
  CHECK_THAT(acc / draws, WithinRel(n_rx * a.squaredNorm(), 0.01));
}

TEST_CASE("rotation of a single point is the identity") {
  const std::vector<StiefelPoint> one{StiefelPoint(column({1, 0}))};
  const RotationOutcome r = optimize_unitary_rotations(one);
  CHECK(r.objective_before == 0.0);
  CHECK(r.objective_after == 0.0);
  CHECK(r.points[0].mat() == one[0].mat());
}

TEST_CASE("rotation of a two-point phase example") {
  const std::vector<StiefelPoint> x{StiefelPoint(column({1, 0})),
                                    StiefelPoint(column({cplx(0, 0.5), std::sqrt(0.75)}))};
  const RotationOutcome r = optimize_unitary_rotations(x);

  double oracle = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3600; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 3600.0;
    oracle = std::min(oracle, phase_objective(x, {0.0, th}));
  }
  CHECK_THAT(oracle, WithinAbs(1.0 / 3.0, 1e-6));
  CHECK_THAT(r.objective_after, WithinAbs(1.0 / 3.0, 1e-8));
  CHECK(r.objective_after <= oracle + 1e-12);
  const cplx ip = (r.points[0].mat().adjoint() * r.points[1].mat())(0, 0);
  CHECK_THAT(ip.real(), WithinAbs(0.5, 1e-6));
  CHECK_THAT(ip.imag(), WithinAbs(0.0, 1e-6));
}

TEST_CASE("rotation of three points matches a phase-grid search") {
  const auto x = random_points(3, 3, 1, 19);
  const RotationOutcome r = optimize_unitary_rotations(x);
  const int steps = 256;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b < steps; ++b) {
      const double ta = 2.0 * std::numbers::pi * a / steps;
      const double tb = 2.0 * std::numbers::pi * b / steps;
      best = std::min(best, phase_objective(x, {0.0, ta, tb}));
    }
  CHECK(r.objective_after <= best + 1e-9);
  CHECK(best - r.objective_after < 1e-3 * std::max(1.0, best));
}

TEST_CASE("rotation objective is invariant to a common rotation") {
  const auto x = random_points(5, 4, 2, 23);
  const RotationProblem problem(x);
  PointTuple u;
  for (std::size_t i = 0; i < x.size(); ++i) {
    GaussianSource rng(24, i);
    u.push_back(random_stiefel(2, 2, rng).mat());
  }
  GaussianSource rng(25, 0);
  const CMat w = random_stiefel(2, 2, rng).mat();
  PointTuple uw = u;
  for (auto& m : uw) m = m * w;
  CHECK_THAT(problem.value(uw), WithinRel(problem.value(u), 1e-12));
}

TEST_CASE("rotation preserves MCD, denominators and union bound") {
  for (Index m : {1, 2}) {
    const Codebook cb(random_points(12, 4, m, 31 + static_cast<std::uint64_t>(m)), Method::External);
    RotationOutcome out;
    const Codebook rot = optimize_unitary_rotations(cb, {}, &out);
    CHECK(rot.method() == Method::ManoptNmse);
    CHECK(rot.source_digest() == cb.digest());
    CHECK(std::abs(min_chordal_distance(rot) - min_chordal_distance(cb)) < 1e-10);
    CHECK_THAT(union_bound_ser(rot, 0.05, 2), WithinRel(union_bound_ser(cb, 0.05, 2), 1e-10));
    for (std::size_t i = 0; i < cb.size(); ++i)
      for (std::size_t j = i + 1; j < cb.size(); ++j)
        CHECK_THAT(pairwise_denominator(rot[i], rot[j]),
                   WithinAbs(pairwise_denominator(cb[i], cb[j]), 1e-12));
    CHECK(out.objective_after < out.objective_before);
    for (const auto& u : out.rotations) CHECK(orthonormality_residual(u) < 1e-10);
  }
}

TEST_CASE("near-identical pairs are excluded or rejected") {
  const StiefelPoint a(column({1, 0, 0})), b(column({0, 1, 0})), c(column({0, 0, 1}));
  const StiefelPoint a2(column({cplx(0, 1), 0, 0}));
  const std::vector<StiefelPoint> pts{a, b, c, a2};

  RotationOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(optimize_unitary_rotations(pts, strict), SingularPair);

  const RotationOutcome r = optimize_unitary_rotations(pts);
  REQUIRE(r.excluded_pairs.size() == 1);
  CHECK(r.excluded_pairs[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(std::isfinite(r.objective_after));
}
