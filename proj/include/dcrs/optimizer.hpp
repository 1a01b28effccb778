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

#include <functional>
#include <string>
#include <vector>

#include "dcrs/types.hpp"

namespace dcrs {

/// Manifold factor kinds supported by the optimiser.
enum class FactorKind {
  Grassmann,  ///< G(T, M) represented on S(T, M); horizontal projection (I - XX^H) G
  Stiefel,    ///< S(T, M) with the embedded metric
  Unitary,    ///< U(M)
};

struct ManifoldFactor {
  FactorKind kind;
  Index rows;
  Index cols;
};

using PointTuple = std::vector<CMat>;

/// Objective callback. Returns f(x); when `grad` is non-null it must be
/// filled with the Euclidean gradient, one matrix per factor, in the
/// convention df = sum_k Re tr(G_k^H dX_k).
using Objective = std::function<double(const PointTuple& x, PointTuple* grad)>;

enum class DescentRule { Steepest, ConjugateGradient };

struct OptimizerOptions {
  DescentRule rule = DescentRule::Steepest;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;
  /// Stop once an accepted step is shorter than this.
  double min_step = 1e-12;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 60;
  bool record_trace = false;
};

enum class StopReason { GradientTolerance, StepTolerance, MaxIterations, LineSearchFailed };

std::string to_string(StopReason r);

struct OptimizerResult {
  PointTuple point;
  double initial_value = 0.0;
  double final_value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::MaxIterations;
  /// Objective after every accepted iteration when record_trace is set.
  std::vector<double> trace;
};

/// Tangent-space projection of a Euclidean gradient at x.
CMat project_tangent(FactorKind kind, const CMat& x, const CMat& g);

/// QR-based retraction R_x(v).
CMat retract(FactorKind kind, const CMat& x, const CMat& v);

/// Re tr(A^H B) summed over factors.
double tuple_inner(const PointTuple& a, const PointTuple& b);

/// Riemannian gradient at x (Euclidean gradient projected per factor).
PointTuple riemannian_gradient(const Objective& f, const std::vector<ManifoldFactor>& factors,
                               const PointTuple& x, double* value = nullptr);

/// Minimises f over a product of Grassmann/Stiefel/unitary factors with
/// Armijo backtracking. Only decreasing steps are accepted, so the objective
/// sequence is non-increasing. Throws NumericAbort on a non-finite value or
/// gradient.
OptimizerResult minimize_on_manifold(const Objective& f,
                                     const std::vector<ManifoldFactor>& factors,
                                     PointTuple init, const OptimizerOptions& opts = {});

}  // namespace dcrs
