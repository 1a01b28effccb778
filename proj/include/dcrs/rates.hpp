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
#include <vector>

#include <json.hpp>

#include "dcrs/codebook.hpp"
#include "dcrs/montecarlo.hpp"

namespace dcrs {

struct RateEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  /// Evaluation settings (SNR, beta, codebook digest or QAM order, ...).
  nlohmann::json params = nlohmann::json::object();
};

/// Square QAM with unit average symbol energy.
struct QamConstellation {
  int order = 0;
  std::vector<cplx> symbols;

  static QamConstellation square(int order);
};

struct RateOptions {
  std::uint64_t max_trials = 20000;
  std::uint64_t min_trials = 500;
  /// Trials between early-stopping checks; fixed so that stopping is reproducible.
  std::uint64_t round_trials = 500;
  /// Stop once the standard error falls below this (bit/sym). 0 disables.
  double stderr_target = 0.02;
  /// Trial t uses substream t regardless of the SNR (common random numbers).
  std::uint64_t seed = 1;
  ParallelOptions parallel{};
};

/// Log-likelihood ratio log p(Y_i | X_j) - log p(Y_i | X_i) in the simplified
/// form (||Y_i^H X_j||^2 - ||Y_i^H X_i||^2) / (sigma_v^2 (1 + sigma_v^2 M/T)).
double eta(const CMat& yi, const StiefelPoint& xi, const StiefelPoint& xj, double sigma_v2);

struct InverseCheck {
  /// max |entry| of the direct inverse minus the closed form.
  double inverse_deviation = 0.0;
  /// |det direct - sigma_v^{2T} (1 + T/(sigma_v^2 M))^M| relative to the closed form.
  double determinant_deviation = 0.0;
  double determinant = 0.0;
};

/// Compares ((T/M) X X^H + sigma_v^2 I)^{-1} and its determinant with their
/// rank-M closed forms.
InverseCheck simplified_inverse_check(const StiefelPoint& x, double sigma_v2);

enum class GrassmannPath { Auto, General };

/// Noncoherent achievable rate of a Grassmann codebook. Each trial draws one
/// (H, V) and evaluates every transmitted codeword against it.
RateEstimate grassmann_rate(const Codebook& codebook, int n_rx, double sigma_v2,
                            const RateOptions& opts, GrassmannPath path = GrassmannPath::Auto);

/// Coherent rate of per-slot spatial multiplexing (codewords S = s / sqrt(M),
/// s in QAM^M) with perfect CSI.
RateEstimate coherent_rate_pcsi(const QamConstellation& qam, int m, int n_rx, double sigma_v2,
                                const RateOptions& opts);

/// Coherent rate under Gauss-Markov CSI error of uncertainty beta, with the
/// error folded into a single noise term of variance sigma_v^2 + beta^2 and
/// sigma_v^2 + sigma_e^2(beta) in the decoding metric.
RateEstimate coherent_rate_csi_error(const QamConstellation& qam, int m, int n_rx,
                                     double sigma_v2, double beta, const RateOptions& opts);

struct FrameLayout {
  int pilot_slots = 4;
  int data_slots = 10;
};

/// pilot_slots * R_g + data_slots * R_e (bits per frame) with independent-run
/// error propagation.
RateEstimate total_slot_rate(const RateEstimate& rg, const RateEstimate& re,
                             const FrameLayout& frame = {});

/// Training baseline: the pilot carries no data, so only data_slots * R_e.
RateEstimate training_total_rate(const RateEstimate& re, const FrameLayout& frame = {});

/// Total divided by the frame length (bit/sym).
RateEstimate per_symbol(const RateEstimate& total, const FrameLayout& frame = {});

}  // namespace dcrs
