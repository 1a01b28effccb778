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

#include "dcrs/channel.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "dcrs/errors.hpp"

namespace dcrs {

double sigma_v2_from_snr_db(double snr_db) {
  if (!std::isfinite(snr_db)) throw DomainError("sigma_v2_from_snr_db: SNR must be finite");
  return std::pow(10.0, -snr_db / 10.0);
}

ChannelRealization draw_channel(Index m, Index n, double sigma_v, GaussianSource& rng) {
  if (m < 1 || n < 1) throw DimensionMismatch("draw_channel: need M, N >= 1");
  if (!(sigma_v >= 0.0)) throw DomainError("draw_channel: sigma_v must be non-negative");
  return {rng.complex_normal(m, n), sigma_v};
}

CMat transmit_block(const StiefelPoint& x, const ChannelRealization& ch, GaussianSource& rng) {
  if (ch.h.rows() != x.m()) throw DimensionMismatch("transmit_block: H must have M rows");
  const double amp = std::sqrt(static_cast<double>(x.t()) / static_cast<double>(x.m()));
  CMat y = amp * (x.mat() * ch.h);
  const CMat v = rng.complex_normal(x.t(), ch.h.cols());
  if (ch.sigma_v > 0.0) y += ch.sigma_v * v;
  return y;
}

CMat transmit_pilot(const CMat& pilot, const ChannelRealization& ch, GaussianSource& rng) {
  if (ch.h.rows() != pilot.cols()) throw DimensionMismatch("transmit_pilot: H must have M rows");
  CMat y = pilot * ch.h;
  const CMat v = rng.complex_normal(pilot.rows(), ch.h.cols());
  if (ch.sigma_v > 0.0) y += ch.sigma_v * v;
  return y;
}

std::string to_string(EstimatorMode mode) { return mode == EstimatorMode::ZF ? "zf" : "mmse"; }

EstimatorMode estimator_from_string(const std::string& s) {
  if (s == "zf") return EstimatorMode::ZF;
  if (s == "mmse") return EstimatorMode::MMSE;
  throw ConfigError("unknown estimator '" + s + "'");
}

CMat training_filter(const CMat& pilot, double sigma_v2, EstimatorMode mode) {
  if (pilot.cols() < 1 || pilot.rows() < pilot.cols())
    throw DimensionMismatch("training_filter: pilot must be T x M with T >= M");
  if (!(sigma_v2 >= 0.0)) throw DomainError("training_filter: sigma_v^2 must be non-negative");
  Eigen::ColPivHouseholderQR<CMat> qr(pilot);
  qr.setThreshold(1e-12);
  if (qr.rank() < pilot.cols()) throw DegenerateInput("training_filter: pilot is rank deficient");
  CMat gram = pilot.adjoint() * pilot;
  if (mode == EstimatorMode::MMSE) gram.diagonal().array() += sigma_v2;
  return gram.ldlt().solve(pilot.adjoint());
}

CMat training_estimate(const CMat& pilot, const CMat& y, double sigma_v2, EstimatorMode mode) {
  if (y.rows() != pilot.rows()) throw DimensionMismatch("training_estimate: Y must have T rows");
  return training_filter(pilot, sigma_v2, mode) * y;
}

CMat make_qpsk_pilot(Index t, Index m, std::uint64_t seed) {
  if (m < 1 || t < m) throw DimensionMismatch("make_qpsk_pilot: need T >= M >= 1");
  GaussianSource rng(derive_seed(seed, "pilot"), 0);
  CVec q(t);
  for (Index k = 0; k < t; ++k) q(k) = std::polar(1.0, std::numbers::pi / 4.0 + std::numbers::pi / 2.0 * static_cast<double>(rng.index(4)));
  CMat p(t, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index c = 0; c < m; ++c)
    for (Index k = 0; k < t; ++k)
      p(k, c) = scale * q(k) * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * c) / static_cast<double>(t));
  return p;
}

Eigen::VectorXd glrt_metrics(const CMat& y, const Codebook& codebook) {
  if (y.rows() != codebook.t()) throw DimensionMismatch("glrt: Y must have T rows");
  const CMat g = y.adjoint() * codebook.stacked();
  const Eigen::VectorXd col = g.colwise().squaredNorm().transpose();
  const Index m = codebook.m();
  if (m == 1) return col;
  return col.reshaped(m, static_cast<Index>(codebook.size())).colwise().sum().transpose();
}

std::size_t glrt_detect(const CMat& y, const Codebook& codebook) {
  const Eigen::VectorXd metric = glrt_metrics(y, codebook);
  Index best = 0;
  for (Index i = 1; i < metric.size(); ++i)
    if (metric(i) > metric(best)) best = i;
  return static_cast<std::size_t>(best);
}

std::size_t glrt_detect_trace(const CMat& y, const Codebook& codebook) {
  if (y.rows() != codebook.t()) throw DimensionMismatch("glrt: Y must have T rows");
  const CMat yy = y * y.adjoint();
  std::size_t best = 0;
  double best_metric = -1.0;
  for (std::size_t i = 0; i < codebook.size(); ++i) {
    const CMat& x = codebook[i].mat();
    const double metric = (yy * x * x.adjoint()).trace().real();
    if (metric > best_metric) {
      best_metric = metric;
      best = i;
    }
  }
  return best;
}

CMat dcrs_estimate(const CMat& y, const StiefelPoint& x_hat, double sigma_v2, EstimatorMode mode) {
  if (y.rows() != x_hat.t()) throw DimensionMismatch("dcrs_estimate: Y must have T rows");
  const double ratio = static_cast<double>(x_hat.t()) / static_cast<double>(x_hat.m());
  const double gain = mode == EstimatorMode::ZF ? 1.0 / std::sqrt(ratio)
                                                : std::sqrt(ratio) / (ratio + sigma_v2);
  return gain * (x_hat.mat().adjoint() * y);
}

double nmse_lower_bound(double sigma_v2, Index m, Index t) {
  if (!(sigma_v2 >= 0.0)) throw DomainError("nmse_lower_bound: sigma_v^2 must be non-negative");
  const double load = sigma_v2 * static_cast<double>(m) / static_cast<double>(t);
  const double inv_a = 1.0 / std::sqrt(1.0 + load);
  return (inv_a - 1.0) * (inv_a - 1.0) + inv_a * inv_a * load;
}

double beta_from_sigma(double sigma_e2) {
  if (!(sigma_e2 > 0.0 && sigma_e2 <= 2.0)) throw DomainError("beta_from_sigma: sigma_e^2 must lie in (0, 2]");
  // 1 - (1 - s/2)^2 = s (1 - s/4) avoids cancellation for small s.
  return std::sqrt(sigma_e2 * (1.0 - 0.25 * sigma_e2));
}

double sigma_from_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("sigma_from_beta: beta must lie in [0, 1]");
  // 2 (1 - sqrt(1 - b^2)) = 2 b^2 / (1 + sqrt(1 - b^2)).
  return 2.0 * beta * beta / (1.0 + std::sqrt(1.0 - beta * beta));
}

CsiErrorModel CsiErrorModel::from_beta(double beta) { return {beta, sigma_from_beta(beta)}; }

CsiErrorModel CsiErrorModel::from_sigma_e2(double sigma_e2) {
  return {beta_from_sigma(sigma_e2), sigma_e2};
}

CMat apply_gauss_markov(const CMat& h, double beta, GaussianSource& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("apply_gauss_markov: beta must lie in [0, 1]");
  const CMat e = rng.complex_normal(h.rows(), h.cols());
  return std::sqrt(1.0 - beta * beta) * h + beta * e;
}

}  // namespace dcrs
