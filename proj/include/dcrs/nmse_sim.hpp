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
#include <span>
#include <vector>

#include "dcrs/channel.hpp"
#include "dcrs/codebook.hpp"
#include "dcrs/montecarlo.hpp"

namespace dcrs {

struct NmseConfig {
  int n_rx = 1;
  EstimatorMode mode = EstimatorMode::ZF;
  std::uint64_t trials = 100000;
  /// Trial t at every SNR point uses substream t of this seed (common random numbers).
  std::uint64_t seed = 1;
  ParallelOptions parallel{};
};

struct NmsePoint {
  double snr_db = 0.0;
  double sigma_v2 = 0.0;
  /// E||H_hat / alpha - H||^2 / E||H||^2 with alpha^2 = E||H_hat||^2 / E||H||^2.
  double sigma_e2 = 0.0;
  double nmse_db = 0.0;
  double stderr_db = 0.0;
  double alpha = 0.0;
  std::uint64_t trials = 0;
  /// Detection errors (always 0 for the training baseline).
  std::uint64_t errors = 0;
  /// Unnormalised E||H_hat - H||_F^2 over all trials and split by detection outcome.
  double raw_mse = 0.0;
  double raw_mse_correct = 0.0;
  double raw_mse_error = 0.0;

  double ser() const noexcept {
    return trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0;
  }
  /// Binomial standard error of ser().
  double ser_stderr() const noexcept;
};

/// Monte Carlo NMSE of DC-RS estimation: draw a codeword uniformly, H and V,
/// detect by GLRT, estimate from the detected codeword, normalise by the
/// empirical alpha and accumulate. Streaming: second moments of
/// (||H_hat||^2, Re<H_hat, H>, ||H||^2) give alpha and the standard error
/// from a single pass.
NmsePoint measure_nmse_point(const Codebook& codebook, double snr_db, const NmseConfig& cfg);

/// Same measurement for the training baseline with a known pilot.
NmsePoint measure_training_nmse_point(const CMat& pilot, double snr_db, const NmseConfig& cfg);

std::vector<NmsePoint> measure_nmse(const Codebook& codebook, std::span<const double> snr_db,
                                    const NmseConfig& cfg);
std::vector<NmsePoint> measure_training_nmse(const CMat& pilot, std::span<const double> snr_db,
                                             const NmseConfig& cfg);

/// Clamps a measured sigma_e^2 into the domain (0, 2] of the Gauss-Markov model.
double clamp_sigma_e2(double sigma_e2) noexcept;

}  // namespace dcrs
