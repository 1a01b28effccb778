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
#include <string>

#include "dcrs/codebook.hpp"
#include "dcrs/rng.hpp"

namespace dcrs {

/// One block-fading realisation: H is M x N with i.i.d. CN(0, 1) entries.
struct ChannelRealization {
  CMat h;
  double sigma_v = 0.0;
};

/// Noise variance sigma_v^2 = 10^(-SNR/10).
double sigma_v2_from_snr_db(double snr_db);

ChannelRealization draw_channel(Index m, Index n, double sigma_v, GaussianSource& rng);

/// Y = sqrt(T/M) X H + sigma_v V with fresh V.
CMat transmit_block(const StiefelPoint& x, const ChannelRealization& ch, GaussianSource& rng);

/// Y = P H + sigma_v V for a pilot normalised to ||P||_F^2 = T.
CMat transmit_pilot(const CMat& pilot, const ChannelRealization& ch, GaussianSource& rng);

enum class EstimatorMode { ZF, MMSE };

std::string to_string(EstimatorMode mode);
EstimatorMode estimator_from_string(const std::string& s);

/// Linear estimator matrix W with H_hat = W Y: P^+ (ZF) or
/// (P^H P + sigma_v^2 I)^{-1} P^H (MMSE). Throws DegenerateInput when P is
/// rank deficient.
CMat training_filter(const CMat& pilot, double sigma_v2, EstimatorMode mode);

CMat training_estimate(const CMat& pilot, const CMat& y, double sigma_v2, EstimatorMode mode);

/// T x M pilot: one seeded random QPSK sequence spread over the M ports by
/// DFT cover codes and scaled by 1/sqrt(M), so that P^H P = (T/M) I.
CMat make_qpsk_pilot(Index t, Index m, std::uint64_t seed);

/// argmax_i ||Y^H X_i||_F^2 from one product Y^H [X_1 ... X_K]. Ties go to
/// the lowest index. M = 1 codebooks take the vector form |y^H x_i|^2.
std::size_t glrt_detect(const CMat& y, const Codebook& codebook);

/// Reference form argmax_i Re tr(Y Y^H X_i X_i^H), evaluated point by point.
std::size_t glrt_detect_trace(const CMat& y, const Codebook& codebook);

/// Per-point GLRT metrics ||Y^H X_i||_F^2.
Eigen::VectorXd glrt_metrics(const CMat& y, const Codebook& codebook);

/// Channel estimate from a detected codeword: sqrt(M/T) X^H Y (ZF) or
/// sqrt(T/M) / (T/M + sigma_v^2) X^H Y (MMSE, using X^H X = I).
CMat dcrs_estimate(const CMat& y, const StiefelPoint& x_hat, double sigma_v2, EstimatorMode mode);

/// Normalised-error floor (1/a - 1)^2 + (M/T) sigma_v^2 / a^2, a = sqrt(1 + sigma_v^2 M/T).
double nmse_lower_bound(double sigma_v2, Index m, Index t);

/// beta = sqrt(1 - (1 - sigma_e^2/2)^2); sigma_e^2 must lie in (0, 2].
double beta_from_sigma(double sigma_e2);

/// sigma_e^2 = 2 (1 - sqrt(1 - beta^2)); beta must lie in [0, 1].
double sigma_from_beta(double beta);

struct CsiErrorModel {
  double beta = 0.0;
  double sigma_e2 = 0.0;

  static CsiErrorModel from_beta(double beta);
  static CsiErrorModel from_sigma_e2(double sigma_e2);
};

/// sqrt(1 - beta^2) H + beta E with fresh E.
CMat apply_gauss_markov(const CMat& h, double beta, GaussianSource& rng);

}  // namespace dcrs
