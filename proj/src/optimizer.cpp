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

#include "dcrs/optimizer.hpp"

#include <cmath>
#include <string>

#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"

namespace dcrs {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient-tolerance";
    case StopReason::StepTolerance: return "step-tolerance";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::LineSearchFailed: return "line-search-failed";
  }
  return "unknown";
}

CMat project_tangent(FactorKind kind, const CMat& x, const CMat& g) {
  switch (kind) {
    case FactorKind::Grassmann:
      return g - x * (x.adjoint() * g);
    case FactorKind::Stiefel: {
      const CMat xg = x.adjoint() * g;
      return g - x * (0.5 * (xg + xg.adjoint()));
    }
    case FactorKind::Unitary: {
      const CMat ug = x.adjoint() * g;
      return x * (0.5 * (ug - ug.adjoint()));
    }
  }
  return g;
}

CMat retract(FactorKind /*kind*/, const CMat& x, const CMat& v) {
  // Same QR map for all three factor kinds; for U(M) it is the square case.
  return qr_orthonormalize(x + v);
}

double tuple_inner(const PointTuple& a, const PointTuple& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k].conjugate()).sum().real();
  return s;
}

namespace {

bool tuple_finite(const PointTuple& t) {
  for (const auto& m : t)
    if (!m.allFinite()) return false;
  return true;
}

void check_shapes(const std::vector<ManifoldFactor>& factors, const PointTuple& x) {
  if (factors.size() != x.size())
    throw DimensionMismatch("minimize_on_manifold: factor count does not match point tuple");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].rows() != factors[k].rows || x[k].cols() != factors[k].cols)
      throw DimensionMismatch("minimize_on_manifold: factor " + std::to_string(k) +
                              " has the wrong shape");
    if (factors[k].kind == FactorKind::Unitary && factors[k].rows != factors[k].cols)
      throw DimensionMismatch("minimize_on_manifold: unitary factor must be square");
  }
}

double evaluate(const Objective& f, const PointTuple& x, PointTuple* grad) {
  const double v = f(x, grad);
  if (!std::isfinite(v)) throw NumericAbort("minimize_on_manifold: non-finite objective value");
  if (grad != nullptr && !tuple_finite(*grad))
    throw NumericAbort("minimize_on_manifold: non-finite gradient");
  return v;
}

PointTuple project_all(const std::vector<ManifoldFactor>& factors, const PointTuple& x,
                       const PointTuple& g) {
  PointTuple out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = project_tangent(factors[k].kind, x[k], g[k]);
  return out;
}

}  // namespace

PointTuple riemannian_gradient(const Objective& f, const std::vector<ManifoldFactor>& factors,
                               const PointTuple& x, double* value) {
  check_shapes(factors, x);
  PointTuple egrad(x.size());
  const double v = evaluate(f, x, &egrad);
  if (value != nullptr) *value = v;
  return project_all(factors, x, egrad);
}

OptimizerResult minimize_on_manifold(const Objective& f,
                                     const std::vector<ManifoldFactor>& factors, PointTuple init,
                                     const OptimizerOptions& opts) {
  check_shapes(factors, init);
  for (std::size_t k = 0; k < init.size(); ++k)
    if (orthonormality_residual(init[k]) > kManifoldTolerance) init[k] = qr_orthonormalize(init[k]);

  OptimizerResult res;
  PointTuple x = std::move(init);
  double fx = 0.0;
  PointTuple grad = riemannian_gradient(f, factors, x, &fx);
  res.initial_value = fx;

  PointTuple dir;
  PointTuple prev_grad;
  double step = opts.initial_step;
  res.reason = StopReason::MaxIterations;

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    const double gnorm2 = tuple_inner(grad, grad);
    res.gradient_norm = std::sqrt(gnorm2);
    if (res.gradient_norm < opts.gradient_tolerance) {
      res.reason = StopReason::GradientTolerance;
      break;
    }

    bool restart = true;
    if (opts.rule == DescentRule::ConjugateGradient && !dir.empty()) {
      // Polak-Ribiere+ with vector transport by projection.
      const PointTuple dir_t = project_all(factors, x, dir);
      const PointTuple prev_t = project_all(factors, x, prev_grad);
      double num = gnorm2 - tuple_inner(grad, prev_t);
      const double beta = std::max(0.0, num / tuple_inner(prev_grad, prev_grad));
      PointTuple cand(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) cand[k] = -grad[k] + beta * dir_t[k];
      if (tuple_inner(cand, grad) < -1e-12 * gnorm2) {
        dir = std::move(cand);
        restart = false;
      }
    }
    if (restart) {
      dir.resize(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) dir[k] = -grad[k];
    }

    const double slope = tuple_inner(grad, dir);
    const double dir_norm = std::sqrt(tuple_inner(dir, dir));

    PointTuple x_new(x.size());
    double f_new = fx;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      for (std::size_t k = 0; k < x.size(); ++k)
        x_new[k] = retract(factors[k].kind, x[k], step * dir[k]);
      f_new = evaluate(f, x_new, nullptr);
      if (f_new <= fx + opts.armijo * step * slope && f_new < fx) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      res.reason = StopReason::LineSearchFailed;
      break;
    }

    const double moved = step * dir_norm;
    x = std::move(x_new);
    fx = f_new;
    if (opts.record_trace) res.trace.push_back(fx);
    prev_grad = std::move(grad);
    grad = riemannian_gradient(f, factors, x, nullptr);
    if (moved < opts.min_step) {
      res.reason = StopReason::StepTolerance;
      res.gradient_norm = std::sqrt(tuple_inner(grad, grad));
      break;
    }
    step *= 2.0;
  }

  res.final_value = fx;
  res.point = std::move(x);
  return res;
}

}  // namespace dcrs
