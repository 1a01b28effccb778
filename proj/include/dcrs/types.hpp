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

#include <complex>

#include <Eigen/Dense>

namespace dcrs {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Frobenius tolerance on X^H X - I for manifold membership.
inline constexpr double kManifoldTolerance = 1e-10;

/// Point on the Stiefel manifold S(T, M): a T x M matrix with orthonormal
/// columns. Also serves as a representative of the Grassmann class [X].
class StiefelPoint {
 public:
  /// Throws NotOnManifold when ||X^H X - I||_F exceeds kManifoldTolerance.
  explicit StiefelPoint(CMat mat);

  const CMat& mat() const noexcept { return mat_; }
  Index t() const noexcept { return mat_.rows(); }
  Index m() const noexcept { return mat_.cols(); }

  /// Right-multiplication by a unitary; stays on the manifold.
  StiefelPoint rotated(const CMat& u) const;

 private:
  CMat mat_;
};

/// Square unitary matrix, element of U(M).
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMat mat);

  const CMat& mat() const noexcept { return mat_; }
  Index order() const noexcept { return mat_.rows(); }

 private:
  CMat mat_;
};

/// ||A^H A - I||_F.
double orthonormality_residual(const CMat& a);

/// Row-major identity block I_{T,M} = [I_M 0]^T.
CMat identity_block(Index t, Index m);

}  // namespace dcrs
