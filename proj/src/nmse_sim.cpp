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

#include "dcrs/nmse_sim.hpp"

#include <cmath>
#include <numbers>

#include "dcrs/errors.hpp"
#include "dcrs/rng.hpp"

namespace dcrs {

namespace {

struct NmseAcc {
  std::uint64_t n = 0;
  std::uint64_t errors = 0;
  // a = ||H_hat||^2, b = Re<H_hat, H>, c = ||H||^2 and their products.
  CompensatedSum a, b, c, aa, bb, cc, ab, ac, bc;
  CompensatedSum raw, raw_correct, raw_error;

  void add(double va, double vb, double vc, double err, bool correct) noexcept {
    ++n;
    a.add(va);
    b.add(vb);
    c.add(vc);
    aa.add(va * va);
    bb.add(vb * vb);
    cc.add(vc * vc);
    ab.add(va * vb);
    ac.add(va * vc);
    bc.add(vb * vc);
    raw.add(err);
    if (correct) {
      raw_correct.add(err);
    } else {
      ++errors;
      raw_error.add(err);
    }
  }
};

void merge_acc(NmseAcc& into, const NmseAcc& from) noexcept {
  into.n += from.n;
  into.errors += from.errors;
  for (auto [dst, src] : {std::pair{&into.a, &from.a}, {&into.b, &from.b}, {&into.c, &from.c},
                          {&into.aa, &from.aa}, {&into.bb, &from.bb}, {&into.cc, &from.cc},
                          {&into.ab, &from.ab}, {&into.ac, &from.ac}, {&into.bc, &from.bc},
                          {&into.raw, &from.raw}, {&into.raw_correct, &from.raw_correct},
                          {&into.raw_error, &from.raw_error}})
    dst->merge(*src);
}

void fill_normal(GaussianSource& rng, CMat& out) {
  for (Index c = 0; c < out.cols(); ++c)
    for (Index r = 0; r < out.rows(); ++r) out(r, c) = rng.complex_normal();
}

/// Statistics of one trial given the estimate and the true channel.
void accumulate(NmseAcc& acc, const CMat& hhat, const CMat& h, bool correct) {
  const double va = hhat.squaredNorm();
  const double vb = hhat.cwiseProduct(h.conjugate()).sum().real();
  const double vc = h.squaredNorm();
  acc.add(va, vb, vc, (hhat - h).squaredNorm(), correct);
}

NmsePoint finalize(const NmseAcc& acc, double snr_db, double sigma_v2) {
  NmsePoint p;
  p.snr_db = snr_db;
  p.sigma_v2 = sigma_v2;
  p.trials = acc.n;
  p.errors = acc.errors;
  if (acc.n == 0) throw DomainError("measure_nmse: no trials");
  const double n = static_cast<double>(acc.n);
  const double sa = acc.a.value(), sb = acc.b.value(), sc = acc.c.value();
  if (!(sa > 0.0) || !(sc > 0.0)) throw NumericAbort("measure_nmse: vanishing channel energy");

  // The sample ||H||^2 replaces its known mean NM in alpha, so that channel
  // energy fluctuations cancel between alpha and the error sum.
  const double alpha2 = sa / sc;
  const double alpha = std::sqrt(alpha2);
  const double sum_q = sa / alpha2 - 2.0 * sb / alpha + sc;
  const double s2 = sum_q / sc;

  // Delta-method error of the ratio sum(q) / sum(c), q = a/alpha^2 - 2b/alpha + c.
  const double ia2 = 1.0 / alpha2, ia = 1.0 / alpha;
  const double sum_qq = acc.aa.value() * ia2 * ia2 + 4.0 * acc.bb.value() * ia2 + acc.cc.value() -
                        4.0 * acc.ab.value() * ia2 * ia + 2.0 * acc.ac.value() * ia2 -
                        4.0 * acc.bc.value() * ia;
  const double sum_qc = acc.ac.value() * ia2 - 2.0 * acc.bc.value() * ia + acc.cc.value();
  const double sum_rr = std::max(0.0, sum_qq - 2.0 * s2 * sum_qc + s2 * s2 * acc.cc.value());
  const double mean_c = sc / n;
  const double se = acc.n > 1 ? std::sqrt(sum_rr / (n * (n - 1.0))) / mean_c : 0.0;

  p.alpha = alpha;
  p.sigma_e2 = s2;
  p.nmse_db = 10.0 * std::log10(s2);
  p.stderr_db = 10.0 / std::numbers::ln10 * se / s2;
  p.raw_mse = acc.raw.value() / n;
  const double ncorrect = static_cast<double>(acc.n - acc.errors);
  p.raw_mse_correct = ncorrect > 0 ? acc.raw_correct.value() / ncorrect : 0.0;
  p.raw_mse_error = acc.errors > 0 ? acc.raw_error.value() / static_cast<double>(acc.errors) : 0.0;
  return p;
}

void check_config(const NmseConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("measure_nmse: trials must be >= 1");
  if (cfg.n_rx < 1) throw DomainError("measure_nmse: n_rx must be >= 1");
}

}  // namespace

double NmsePoint::ser_stderr() const noexcept {
  if (trials < 2) return 0.0;
  const double p = ser();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double clamp_sigma_e2(double sigma_e2) noexcept {
  if (!(sigma_e2 > 1e-300)) return 1e-300;
  return std::min(sigma_e2, 2.0);
}

NmsePoint measure_nmse_point(const Codebook& codebook, double snr_db, const NmseConfig& cfg) {
  check_config(cfg);
  const double sigma_v2 = sigma_v2_from_snr_db(snr_db);
  const double sigma_v = std::sqrt(sigma_v2);
  const Index t = codebook.t(), m = codebook.m(), n = cfg.n_rx;
  const auto k = static_cast<Index>(codebook.size());
  const double ratio = static_cast<double>(t) / static_cast<double>(m);
  const double amp = std::sqrt(ratio);
  const double gain = cfg.mode == EstimatorMode::ZF ? 1.0 / amp : amp / (ratio + sigma_v2);
  const CMat& stacked = codebook.stacked();
  const std::uint64_t seed = derive_seed(cfg.seed, "nmse");

  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    NmseAcc acc;
    CMat h(m, n), v(t, n), y(t, n), g(n, k * m), hhat(m, n);
    Eigen::VectorXd metric(k);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      GaussianSource rng(seed, trial);
      const auto sent = static_cast<Index>(rng.index(static_cast<std::uint64_t>(k)));
      fill_normal(rng, h);
      fill_normal(rng, v);
      y.noalias() = amp * (stacked.middleCols(sent * m, m) * h);
      y += sigma_v * v;

      g.noalias() = y.adjoint() * stacked;
      if (m == 1) {
        metric = g.colwise().squaredNorm().transpose();
      } else {
        for (Index i = 0; i < k; ++i) metric(i) = g.middleCols(i * m, m).squaredNorm();
      }
      Index best = 0;
      for (Index i = 1; i < k; ++i)
        if (metric(i) > metric(best)) best = i;

      hhat.noalias() = gain * (stacked.middleCols(best * m, m).adjoint() * y);
      accumulate(acc, hhat, h, best == sent);
    }
    return acc;
  };
  const NmseAcc total = run_chunks<NmseAcc>(0, cfg.trials, cfg.parallel, body, merge_acc);
  return finalize(total, snr_db, sigma_v2);
}

NmsePoint measure_training_nmse_point(const CMat& pilot, double snr_db, const NmseConfig& cfg) {
  check_config(cfg);
  const double sigma_v2 = sigma_v2_from_snr_db(snr_db);
  const double sigma_v = std::sqrt(sigma_v2);
  const Index t = pilot.rows(), m = pilot.cols(), n = cfg.n_rx;
  const CMat w = training_filter(pilot, sigma_v2, cfg.mode);
  const std::uint64_t seed = derive_seed(cfg.seed, "nmse");

  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    NmseAcc acc;
    CMat h(m, n), v(t, n), y(t, n), hhat(m, n);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      GaussianSource rng(seed, trial);
      // Same draw layout as the DC-RS loop so both see identical H and V.
      (void)rng.index(2);
      fill_normal(rng, h);
      fill_normal(rng, v);
      y.noalias() = pilot * h;
      y += sigma_v * v;
      hhat.noalias() = w * y;
      accumulate(acc, hhat, h, true);
    }
    return acc;
  };
  const NmseAcc total = run_chunks<NmseAcc>(0, cfg.trials, cfg.parallel, body, merge_acc);
  return finalize(total, snr_db, sigma_v2);
}

std::vector<NmsePoint> measure_nmse(const Codebook& codebook, std::span<const double> snr_db,
                                    const NmseConfig& cfg) {
  std::vector<NmsePoint> out;
  for (double s : snr_db) out.push_back(measure_nmse_point(codebook, s, cfg));
  return out;
}

std::vector<NmsePoint> measure_training_nmse(const CMat& pilot, std::span<const double> snr_db,
                                             const NmseConfig& cfg) {
  std::vector<NmsePoint> out;
  for (double s : snr_db) out.push_back(measure_training_nmse_point(pilot, s, cfg));
  return out;
}

}  // namespace dcrs
