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

#include "dcrs/nmse_opt.hpp"

#include <cmath>

#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"

namespace dcrs {

namespace {

constexpr double kSingularDenominator = 1e-12;

// det(I - G G^H) with G = X_i^H X_j equals det(R^H R) for the residual
// R = X_i - X_j G^H. Taking it from the QR diagonal of R avoids the 1 - cos^2
// cancellation that makes close pairs lose half their digits.
double residual_denominator(const CMat& xi, const CMat& xj) {
  const CMat r = xi - xj * (xj.adjoint() * xi);
  const Eigen::HouseholderQR<CMat> qr(r);
  double den = 1.0;
  for (Index k = 0; k < r.cols(); ++k) den *= std::norm(qr.matrixQR()(k, k));
  return den;
}

double pep_from_denominator(double den, double sigma_v2, Index m, int n_rx) {
  const int mn = static_cast<int>(m) * n_rx;
  return std::pow(sigma_v2, mn) * binomial(2 * mn - 1, mn) / std::pow(den, n_rx);
}

void check_noise(double sigma_v2, int n_rx) {
  if (!(sigma_v2 > 0.0) || !std::isfinite(sigma_v2))
    throw DomainError("pairwise error: sigma_v^2 must be positive and finite");
  if (n_rx < 1) throw DomainError("pairwise error: need at least one receive antenna");
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return std::round(out);
}

double pairwise_denominator(const StiefelPoint& xi, const StiefelPoint& xj) {
  if (xi.t() != xj.t() || xi.m() != xj.m())
    throw DimensionMismatch("pairwise_denominator: points have different (T, M)");
  return residual_denominator(xi.mat(), xj.mat());
}

double pairwise_error_prob(const StiefelPoint& xi, const StiefelPoint& xj, double sigma_v2,
                           int n_rx) {
  check_noise(sigma_v2, n_rx);
  const double den = pairwise_denominator(xi, xj);
  if (den < kSingularDenominator) throw SingularPair(0, 1, "pairwise_error_prob: identical subspaces");
  return pep_from_denominator(den, sigma_v2, xi.m(), n_rx);
}

PairwiseErrorTable pairwise_error_table(const Codebook& codebook, double sigma_v2, int n_rx) {
  check_noise(sigma_v2, n_rx);
  const auto n = static_cast<Index>(codebook.size());
  const Index m = codebook.m();
  PairwiseErrorTable table{sigma_v2, n_rx, Eigen::MatrixXd::Zero(n, n)};
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      const double den = pairwise_denominator(codebook[a], codebook[b]);
      if (den < kSingularDenominator)
        throw SingularPair(a, b, "pairwise_error_table: identical subspaces");
      table.p(i, j) = table.p(j, i) = pep_from_denominator(den, sigma_v2, m, n_rx);
    }
  return table;
}

double union_bound_ser(const Codebook& codebook, double sigma_v2, int n_rx) {
  const PairwiseErrorTable table = pairwise_error_table(codebook, sigma_v2, n_rx);
  // Sum of the strict upper triangle equals half the symmetric total.
  return table.p.sum() / static_cast<double>(codebook.size());
}

NmsePrediction predicted_channel_error(const Codebook& codebook, double sigma_v2, int n_rx,
                                       double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("predicted_channel_error: kappa must lie in (0, 1]");
  const PairwiseErrorTable table = pairwise_error_table(codebook, sigma_v2, n_rx);
  const auto n = static_cast<Index>(codebook.size());
  const Index m = codebook.m();
  const double t = static_cast<double>(codebook.t());
  const CMat gram = codebook.stacked().adjoint() * codebook.stacked();
  const CMat eye = CMat::Identity(m, m);

  double weighted = 0.0;
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      // X_j^H X_i is block (j, i) of the Gram matrix.
      const double d_norm = n_rx * (gram.block(j * m, i * m, m, m) - eye).squaredNorm();
      weighted += table.p(i, j) * d_norm;
    }

  NmsePrediction out;
  out.kappa = kappa;
  out.noise_term = sigma_v2 * static_cast<double>(m * m) * n_rx / t;
  out.error_term = kappa * 2.0 / static_cast<double>(n) * weighted;
  out.ser_bound = table.p.sum() / static_cast<double>(n);
  out.valid = kappa * out.ser_bound < 1.0;
  return out;
}

// ---------------------------------------------------------------------------

RotationProblem::RotationProblem(std::span<const StiefelPoint> points, double singular_threshold)
    : n_(points.size()) {
  if (points.empty()) throw DegenerateInput("RotationProblem: no points");
  m_ = points.front().m();
  const Index t = points.front().t();
  CMat stacked(t, m_ * static_cast<Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    if (points[i].t() != t || points[i].m() != m_)
      throw DimensionMismatch("RotationProblem: points have different (T, M)");
    stacked.middleCols(static_cast<Index>(i) * m_, m_) = points[i].mat();
  }
  weighted_gram_ = stacked.adjoint() * stacked;
  const auto n = static_cast<Index>(n_);
  for (Index i = 0; i < n; ++i) weighted_gram_.block(i * m_, i * m_, m_, m_).setZero();
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      auto gij = weighted_gram_.block(i * m_, j * m_, m_, m_);
      auto gji = weighted_gram_.block(j * m_, i * m_, m_, m_);
      const double den =
          residual_denominator(points[static_cast<std::size_t>(i)].mat(), points[static_cast<std::size_t>(j)].mat());
      if (den < singular_threshold) {
        excluded_.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        gij.setZero();
        gji.setZero();
        continue;
      }
      constant_ += (static_cast<double>(m_) + gij.squaredNorm()) / den;
      gij /= den;
      gji /= den;
    }
}

double RotationProblem::value(const PointTuple& rotations, PointTuple* grad) const {
  if (rotations.size() != n_) throw DimensionMismatch("RotationProblem: wrong number of rotations");
  CMat v(m_ * static_cast<Index>(n_), m_);
  for (std::size_t i = 0; i < n_; ++i) v.middleRows(static_cast<Index>(i) * m_, m_) = rotations[i];
  // sum_{i<j} Re tr(U_i^H W_ij U_j) = Re tr(V^H W V) / 2 for Hermitian W.
  const CMat wv = weighted_gram_ * v;
  const double cross = (v.adjoint() * wv).trace().real();
  if (grad != nullptr) {
    grad->resize(n_);
    for (std::size_t i = 0; i < n_; ++i) (*grad)[i] = -2.0 * wv.middleRows(static_cast<Index>(i) * m_, m_);
  }
  return constant_ - cross;
}

RotationOutcome optimize_unitary_rotations(std::span<const StiefelPoint> points,
                                           const RotationOptions& opts) {
  const RotationProblem problem(points, opts.singular_threshold);
  if (opts.strict && !problem.excluded_pairs().empty()) {
    const auto [i, j] = problem.excluded_pairs().front();
    throw SingularPair(i, j, "optimize_unitary_rotations: near-identical subspaces");
  }
  const Index m = problem.m();
  RotationOutcome out;
  out.excluded_pairs = problem.excluded_pairs();

  PointTuple init(points.size(), CMat::Identity(m, m));
  if (points.size() < 2) {
    out.points.assign(points.begin(), points.end());
    out.rotations = init;
    out.reason = StopReason::GradientTolerance;
    return out;
  }
  const std::vector<ManifoldFactor> factors(points.size(), ManifoldFactor{FactorKind::Unitary, m, m});
  const Objective f = [&problem](const PointTuple& u, PointTuple* g) { return problem.value(u, g); };
  OptimizerResult res = minimize_on_manifold(f, factors, std::move(init), opts.optimizer);

  out.objective_before = res.initial_value;
  out.objective_after = res.final_value;
  out.iterations = res.iterations;
  out.reason = res.reason;
  out.rotations = std::move(res.point);
  out.points.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out.points.emplace_back(points[i].mat() * out.rotations[i]);
  return out;
}

Codebook optimize_unitary_rotations(const Codebook& codebook, const RotationOptions& opts,
                                    RotationOutcome* outcome) {
  RotationOutcome res = optimize_unitary_rotations(std::span<const StiefelPoint>(codebook.points()), opts);
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& [i, j] : res.excluded_pairs) excluded.push_back({i, j});
  nlohmann::json params = {{"source_method", to_string(codebook.method())},
                           {"source_params", codebook.params()},
                           {"objective_before", res.objective_before},
                           {"objective_after", res.objective_after},
                           {"iterations", res.iterations},
                           {"excluded_pairs", excluded}};
  Codebook rotated(res.points, Method::ManoptNmse, std::move(params), codebook.digest());
  if (outcome != nullptr) *outcome = std::move(res);
  return rotated;
}

}  // namespace dcrs
