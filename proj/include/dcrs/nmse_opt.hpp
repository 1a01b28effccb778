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

#include <span>
#include <utility>
#include <vector>

#include "dcrs/codebook.hpp"
#include "dcrs/optimizer.hpp"

namespace dcrs {

/// Re det(I_M - X_i^H X_j X_j^H X_i): product of squared sines of the
/// principal angles, symmetric in (i, j) and invariant under X -> X U.
double pairwise_denominator(const StiefelPoint& xi, const StiefelPoint& xj);

/// Chernoff-type pairwise error bound
///   sigma_v^{2MN} C(2MN - 1, MN) / det(...)^N.
/// Not clamped to [0, 1]. Throws SingularPair when det(...) < 1e-12.
double pairwise_error_prob(const StiefelPoint& xi, const StiefelPoint& xj, double sigma_v2,
                           int n_rx);

/// C(n, k) as a double (exact for the small arguments used here).
double binomial(int n, int k);

struct PairwiseErrorTable {
  double sigma_v2 = 0.0;
  int n_rx = 0;
  /// Symmetric |X| x |X| matrix, zero diagonal.
  Eigen::MatrixXd p;
};

PairwiseErrorTable pairwise_error_table(const Codebook& codebook, double sigma_v2, int n_rx);

/// (2 / |X|) sum_{i<j} p_ij.
double union_bound_ser(const Codebook& codebook, double sigma_v2, int n_rx);

struct NmsePrediction {
  double noise_term = 0.0;
  double error_term = 0.0;
  double kappa = 1.0;
  /// Union-bound SER at this noise level.
  double ser_bound = 0.0;
  /// False once kappa * ser_bound >= 1, where the expansion stops being meaningful.
  bool valid = true;
  double total() const noexcept { return noise_term + error_term; }
};

/// Predicted E||H_hat - H||_F^2 of the DC-RS ZF estimate: detection-noise floor
/// sigma_v^2 M^2 N / T plus kappa (2/|X|) sum_{i<j} p_ij N ||X_j^H X_i - I||_F^2.
NmsePrediction predicted_channel_error(const Codebook& codebook, double sigma_v2, int n_rx,
                                       double kappa = 1.0);

// ---------------------------------------------------------------------------
// Unitary rotations minimising the estimation-error metric
// ---------------------------------------------------------------------------

/// Precomputed pair data for the rotation objective.
class RotationProblem {
 public:
  /// Pairs whose denominator falls below `singular_threshold` are excluded
  /// and listed in excluded_pairs().
  explicit RotationProblem(std::span<const StiefelPoint> points, double singular_threshold = 1e-12);

  std::size_t size() const noexcept { return n_; }
  Index m() const noexcept { return m_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& excluded_pairs() const noexcept {
    return excluded_;
  }

  /// sum_{i<j} ||I - U_i^H G_ij U_j||_F^2 / d_ij over the included pairs, with
  /// G_ij = X_i^H X_j. Fills the Euclidean gradient when `grad` is non-null.
  double value(const PointTuple& rotations, PointTuple* grad = nullptr) const;

 private:
  std::size_t n_ = 0;
  Index m_ = 0;
  /// Gram matrix with block (i, j) divided by d_ij; excluded and diagonal blocks zero.
  CMat weighted_gram_;
  /// sum over included pairs of (M + ||G_ij||^2) / d_ij.
  double constant_ = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> excluded_;
};

struct RotationOptions {
  OptimizerOptions optimizer{.rule = DescentRule::ConjugateGradient, .max_iterations = 3000,
                             .gradient_tolerance = 1e-8};
  double singular_threshold = 1e-12;
  /// Throw SingularPair instead of excluding near-identical pairs.
  bool strict = false;
};

struct RotationOutcome {
  std::vector<StiefelPoint> points;
  std::vector<CMat> rotations;
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> excluded_pairs;
  int iterations = 0;
  StopReason reason = StopReason::GradientTolerance;
};

/// Rotations {U_i} in U(M) starting from U_i = I. Works for any number of
/// points; a single point has an empty objective and is returned unchanged.
RotationOutcome optimize_unitary_rotations(std::span<const StiefelPoint> points,
                                           const RotationOptions& opts = {});

/// Rotated codebook tagged manopt-nmse, referencing the input digest.
Codebook optimize_unitary_rotations(const Codebook& codebook, const RotationOptions& opts = {},
                                    RotationOutcome* outcome = nullptr);

}  // namespace dcrs
