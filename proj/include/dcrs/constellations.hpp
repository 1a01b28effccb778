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

#include "dcrs/codebook.hpp"
#include "dcrs/optimizer.hpp"

namespace dcrs {

// ---------------------------------------------------------------------------
// Exp-map
// ---------------------------------------------------------------------------

enum class SymbolAlphabet { Qam, Psk };

std::string to_string(SymbolAlphabet a);
SymbolAlphabet alphabet_from_string(const std::string& s);

struct ExpMapParams {
  Index t = 0;
  Index m = 0;
  /// Modulation order of each constituent symbol; order 1 means the symbol is
  /// held at zero. M = 1 uses T - 1 symbols, (M, T) = (2, 4) uses four.
  std::vector<int> per_symbol_orders;
  SymbolAlphabet alphabet = SymbolAlphabet::Qam;
  double scale = 1.0;
};

/// Points of a unit-average-energy alphabet in index order. QAM orders must
/// be 2 (BPSK) or a perfect square; order 1 yields the single symbol 0.
std::vector<cplx> symbol_alphabet(SymbolAlphabet alphabet, int order);

/// The M x (T - M) generator matrix C for one symbol vector (already scaled).
/// Throws UnsupportedShape outside M = 1 and (M, T) = (2, 4).
CMat expmap_generator(Index t, Index m, std::span<const cplx> symbols);

/// exp([[0, C], [-C^H, 0]]) I_{T,M}.
CMat expmap_point(const CMat& c, Index t);

/// Codebook of prod(orders) points in symbol-index lexicographic order (first
/// symbol most significant). Throws DegenerateInput if two points coincide.
Codebook build_expmap(const ExpMapParams& params);

/// Grid scale maximising the minimum chordal distance; ties go to the smaller
/// scale. Non-positive scales and degenerate constellations count as MCD 0.
double tune_expmap_scale(const ExpMapParams& params, std::span<const double> grid);

/// Even split of `bits` over the constituent symbols with a tuned scale.
ExpMapParams default_expmap_params(Index t, Index m, int bits);

// ---------------------------------------------------------------------------
// Cube-split (M = 1)
// ---------------------------------------------------------------------------

struct CubeSplitParams {
  Index t = 0;
  /// B_j for the 2(T - 1) grid coordinates, interleaved (Re t_1, Im t_1, Re t_2, ...).
  std::vector<int> bits_per_coord;
};

/// Spreads `coord_bits` over the 2(T - 1) coordinates as evenly as possible,
/// earlier coordinates taking the remainder.
CubeSplitParams cubesplit_even_params(Index t, int coord_bits);

/// Parameters for a 2^bits point codebook; requires T to be a power of two.
CubeSplitParams cubesplit_params_for_bits(Index t, int bits);

/// Inverse of the standard normal CDF on (0, 1).
double inverse_normal_cdf(double p);

/// Maps one grid pair (a_1, a_2) to the unit disc; xi(0) = 0.
cplx cubesplit_xi(double a1, double a2);

/// T * 2^{sum B_j} points: position i of the inserted 1 is the outer loop,
/// the grid vector (a_1 most significant) the inner one.
Codebook build_cubesplit(const CubeSplitParams& params);

// ---------------------------------------------------------------------------
// Minimum-distance optimisation on G(T, M)
// ---------------------------------------------------------------------------

struct ManoptOptions {
  /// Decreasing smoothing constants, each stage warm-started from the last.
  std::vector<double> epsilon_schedule{1e-1, 1e-2, 1e-3};
  /// Per-stage optimiser settings.
  OptimizerOptions optimizer{};
};

/// Smoothed max-min surrogate eps * lse(-||P_i - P_j||_F / eps) (general M) or
/// eps * lse(|x_i^H x_j| / eps) (M = 1) over unordered pairs, evaluated in the
/// log domain. Fills the Euclidean gradient when `grad` is non-null.
double mcd_surrogate(const PointTuple& points, double epsilon, PointTuple* grad);

/// Optimised codebook of `size` points from a random start drawn with `seed`.
/// The best snapshot (by MCD) over the initial point and every stage is
/// returned, so the MCD never falls below that of the random start.
Codebook build_manopt(std::size_t size, Index t, Index m, std::uint64_t seed,
                      const ManoptOptions& opts = {});

/// Random initial points used by build_manopt for the same arguments.
std::vector<StiefelPoint> manopt_initial_points(std::size_t size, Index t, Index m,
                                                std::uint64_t seed);

}  // namespace dcrs
