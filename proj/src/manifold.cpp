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

#include "dcrs/manifold.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dcrs/errors.hpp"

namespace dcrs {

StiefelPoint::StiefelPoint(CMat mat) : mat_(std::move(mat)) {
  if (mat_.rows() < 1 || mat_.cols() < 1 || mat_.cols() > mat_.rows())
    throw DimensionMismatch("StiefelPoint: need T >= M >= 1, got " +
                            std::to_string(mat_.rows()) + "x" + std::to_string(mat_.cols()));
  const double r = orthonormality_residual(mat_);
  if (!(r <= kManifoldTolerance))
    throw NotOnManifold("StiefelPoint: ||X^H X - I||_F = " + std::to_string(r));
}

StiefelPoint StiefelPoint::rotated(const CMat& u) const {
  if (u.rows() != m() || u.cols() != m())
    throw DimensionMismatch("StiefelPoint::rotated: rotation must be M x M");
  return StiefelPoint(mat_ * u);
}

UnitaryMatrix::UnitaryMatrix(CMat mat) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
    throw DimensionMismatch("UnitaryMatrix: matrix must be square");
  const double r = orthonormality_residual(mat_);
  if (!(r <= kManifoldTolerance))
    throw NotOnManifold("UnitaryMatrix: ||U^H U - I||_F = " + std::to_string(r));
}

double orthonormality_residual(const CMat& a) {
  return (a.adjoint() * a - CMat::Identity(a.cols(), a.cols())).norm();
}

CMat identity_block(Index t, Index m) {
  CMat out = CMat::Zero(t, m);
  for (Index k = 0; k < std::min(t, m); ++k) out(k, k) = 1.0;
  return out;
}

CMat qr_orthonormalize(const CMat& a) {
  if (a.cols() > a.rows() || a.cols() < 1)
    throw DimensionMismatch("qr_orthonormalize: need rows >= cols >= 1");
  if (!a.allFinite()) throw DegenerateInput("qr_orthonormalize: non-finite entries");

  Eigen::HouseholderQR<CMat> qr(a);
  const CMat& packed = qr.matrixQR();
  const double scale = a.norm();
  CMat q = qr.householderQ() * CMat::Identity(a.rows(), a.cols());
  for (Index k = 0; k < a.cols(); ++k) {
    const cplx rkk = packed(k, k);
    const double mag = std::abs(rkk);
    if (!(mag > 1e-12 * scale))
      throw DegenerateInput("qr_orthonormalize: input is rank deficient");
    // Fold the phase of R(k,k) into Q so that R has a positive diagonal.
    q.col(k) *= rkk / mag;
  }
  return q;
}

StiefelPoint project_to_stiefel(const CMat& a) { return StiefelPoint(qr_orthonormalize(a)); }

namespace {

void require_same_shape(const StiefelPoint& xi, const StiefelPoint& xj) {
  if (xi.t() != xj.t() || xi.m() != xj.m())
    throw DimensionMismatch("chordal_distance: points have different (T, M)");
}

}  // namespace

double chordal_distance_projector(const StiefelPoint& xi, const StiefelPoint& xj) {
  require_same_shape(xi, xj);
  const CMat diff = xi.mat() * xi.mat().adjoint() - xj.mat() * xj.mat().adjoint();
  return diff.norm() / std::sqrt(2.0);
}

double chordal_distance(const StiefelPoint& xi, const StiefelPoint& xj) {
  require_same_shape(xi, xj);
  if (xi.m() == 1) {
    const double ip2 = std::norm(xi.mat().col(0).dot(xj.mat().col(0)));
    return std::sqrt(std::max(0.0, 1.0 - ip2));
  }
  return chordal_distance_projector(xi, xj);
}

CMat expm_skew_hermitian(const CMat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("expm_skew_hermitian: matrix must be square");
  if (!a.allFinite()) throw DomainError("expm_skew_hermitian: non-finite entries");
  const double skew_err = (a + a.adjoint()).norm();
  if (skew_err > 1e-12 * std::max(1.0, a.norm()))
    throw DomainError("expm_skew_hermitian: matrix is not skew-Hermitian");

  // A = -j H with H = j A Hermitian, so exp(A) = V diag(exp(-j lambda)) V^H.
  const CMat h = cplx(0.0, 1.0) * a;
  const CMat h_sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(h_sym);
  if (eig.info() != Eigen::Success) throw NumericAbort("expm_skew_hermitian: eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  CVec phase(lambda.size());
  for (Index k = 0; k < lambda.size(); ++k) phase(k) = std::polar(1.0, -lambda(k));
  const CMat& v = eig.eigenvectors();
  return v * phase.asDiagonal() * v.adjoint();
}

UnitaryMatrix skew_block_exp(const CMat& c) {
  const Index m = c.rows();
  const Index t = m + c.cols();
  if (m < 1 || c.cols() < 1) throw DimensionMismatch("skew_block_exp: C must be M x (T-M) with T > M");
  CMat a = CMat::Zero(t, t);
  a.topRightCorner(m, t - m) = c;
  a.bottomLeftCorner(t - m, m) = -c.adjoint();
  return UnitaryMatrix(expm_skew_hermitian(a));
}

StiefelPoint random_stiefel(Index t, Index m, GaussianSource& rng) {
  if (m < 1 || t < m) throw DimensionMismatch("random_stiefel: need t >= m >= 1");
  // A Gaussian draw is full rank with probability one; retry covers the null event.
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      return project_to_stiefel(rng.complex_normal(t, m));
    } catch (const DegenerateInput&) {
    }
  }
  throw DegenerateInput("random_stiefel: repeated rank-deficient draws");
}

}  // namespace dcrs
