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

#include "dcrs/rng.hpp"
#include "dcrs/types.hpp"

namespace dcrs {

/// Orthonormalises the columns of `a` by a thin QR factorisation whose R has
/// a real positive diagonal, so already-orthonormal input maps to itself.
/// Throws DegenerateInput on (numerically) rank-deficient input.
CMat qr_orthonormalize(const CMat& a);

StiefelPoint project_to_stiefel(const CMat& a);

/// ||X_i X_i^H - X_j X_j^H||_F / sqrt(2). Dispatches to the inner-product
/// form sqrt(1 - |x_i^H x_j|^2) when M = 1.
double chordal_distance(const StiefelPoint& xi, const StiefelPoint& xj);

/// Always evaluates the projector-difference form.
double chordal_distance_projector(const StiefelPoint& xi, const StiefelPoint& xj);

/// exp([[0, C], [-C^H, 0]]) for C of shape M x (T - M). The block matrix is
/// skew-Hermitian, so it is exponentiated through the eigendecomposition of
/// the Hermitian matrix j*A.
UnitaryMatrix skew_block_exp(const CMat& c);

/// exp(A) for a skew-Hermitian A (checked to 1e-12 relative).
CMat expm_skew_hermitian(const CMat& a);

/// Orthonormalised i.i.d. CN(0,1) draw, uniform on G(T, M).
StiefelPoint random_stiefel(Index t, Index m, GaussianSource& rng);

}  // namespace dcrs
