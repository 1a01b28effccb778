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

#include "dcrs/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/rng.hpp"

namespace dcrs {

namespace {

void fill_normal(GaussianSource& rng, CMat& out) {
  for (Index c = 0; c < out.cols(); ++c)
    for (Index r = 0; r < out.rows(); ++r) out(r, c) = rng.complex_normal();
}

/// Stable log(sum(exp(v))).
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double vmax = v.maxCoeff();
  if (!std::isfinite(vmax)) throw NumericAbort("log_sum_exp: non-finite exponent");
  return vmax + std::log((v.array() - vmax).exp().sum());
}

void check_rate_inputs(double sigma_v2, int n_rx, const RateOptions& opts) {
  if (!(sigma_v2 > 0.0) || !std::isfinite(sigma_v2))
    throw DomainError("rate: sigma_v^2 must be positive and finite");
  if (n_rx < 1) throw DomainError("rate: n_rx must be >= 1");
  if (opts.max_trials < 1) throw DomainError("rate: max_trials must be >= 1");
}

/// Runs per-trial statistics in fixed rounds until the standard error of
/// `scale * mean` drops below the target or max_trials is reached.
template <class Body>
RunningMoments run_rounds(const RateOptions& opts, double scale, Body&& body) {
  const std::uint64_t round = std::max<std::uint64_t>(1, opts.round_trials);
  RunningMoments total;
  std::uint64_t done = 0;
  auto merge = [](RunningMoments& into, const RunningMoments& from) { into.merge(from); };
  while (done < opts.max_trials) {
    const std::uint64_t count = std::min(round, opts.max_trials - done);
    total.merge(run_chunks<RunningMoments>(done, count, opts.parallel, body, merge));
    done += count;
    if (opts.stderr_target > 0.0 && done >= opts.min_trials &&
        scale * total.stderr_of_mean() < opts.stderr_target)
      break;
  }
  return total;
}

}  // namespace

QamConstellation QamConstellation::square(int order) {
  return {order, symbol_alphabet(SymbolAlphabet::Qam, order)};
}

double eta(const CMat& yi, const StiefelPoint& xi, const StiefelPoint& xj, double sigma_v2) {
  if (xi.t() != xj.t() || xi.m() != xj.m() || yi.rows() != xi.t())
    throw DimensionMismatch("eta: inconsistent shapes");
  if (!(sigma_v2 > 0.0)) throw DomainError("eta: sigma_v^2 must be positive");
  const double load = sigma_v2 * static_cast<double>(xi.m()) / static_cast<double>(xi.t());
  const double num = (yi.adjoint() * xj.mat()).squaredNorm() - (yi.adjoint() * xi.mat()).squaredNorm();
  return num / (sigma_v2 * (1.0 + load));
}

InverseCheck simplified_inverse_check(const StiefelPoint& x, double sigma_v2) {
  if (!(sigma_v2 > 0.0)) throw DomainError("simplified_inverse_check: sigma_v^2 must be positive");
  const Index t = x.t();
  const double tm = static_cast<double>(t) / static_cast<double>(x.m());
  const CMat xx = x.mat() * x.mat().adjoint();
  const CMat cov = tm * xx + sigma_v2 * CMat::Identity(t, t);
  const CMat direct = cov.inverse();
  const CMat closed = (CMat::Identity(t, t) - xx / (1.0 + sigma_v2 / tm)) / sigma_v2;

  InverseCheck out;
  out.inverse_deviation = (direct - closed).cwiseAbs().maxCoeff();
  const double det_direct = cov.determinant().real();
  const double det_closed =
      std::pow(sigma_v2, static_cast<double>(t)) * std::pow(1.0 + tm / sigma_v2, static_cast<double>(x.m()));
  out.determinant = det_direct;
  out.determinant_deviation = std::abs(det_direct - det_closed) / det_closed;
  return out;
}

RateEstimate grassmann_rate(const Codebook& codebook, int n_rx, double sigma_v2,
                            const RateOptions& opts, GrassmannPath path) {
  check_rate_inputs(sigma_v2, n_rx, opts);
  const Index t = codebook.t(), m = codebook.m(), n = n_rx;
  const auto k = static_cast<Index>(codebook.size());
  const double ratio = static_cast<double>(t) / static_cast<double>(m);
  const double amp = std::sqrt(ratio);
  const double sigma_v = std::sqrt(sigma_v2);
  const double denom = sigma_v2 * (1.0 + sigma_v2 / ratio);
  const CMat& stacked = codebook.stacked();
  const double scale = 1.0 / (static_cast<double>(t) * static_cast<double>(k) * std::numbers::ln2);
  const bool fast = path == GrassmannPath::Auto && m == 1 && n == 1;

  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    RunningMoments acc;
    CMat h(m, n), v(t, n), yall(t, k * n), g(k * n, k * m);
    Eigen::MatrixXd q(k, k);
    Eigen::VectorXd row(k);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      GaussianSource rng(opts.seed, trial);
      fill_normal(rng, h);
      fill_normal(rng, v);
      for (Index i = 0; i < k; ++i) {
        yall.middleCols(i * n, n).noalias() = amp * (stacked.middleCols(i * m, m) * h);
        yall.middleCols(i * n, n) += sigma_v * v;
      }
      if (fast) {
        g.noalias() = yall.adjoint() * stacked;
        q = g.cwiseAbs2();
      } else {
        // ||Y_i^H X_j||_F^2 as Re tr(X_j^H Y_i Y_i^H X_j), block by block.
        for (Index i = 0; i < k; ++i) {
          const CMat r = yall.middleCols(i * n, n) * yall.middleCols(i * n, n).adjoint();
          const CMat rx = r * stacked;
          for (Index j = 0; j < k; ++j)
            q(i, j) = (stacked.middleCols(j * m, m).adjoint() * rx.middleCols(j * m, m)).trace().real();
        }
      }
      double total = 0.0;
      for (Index i = 0; i < k; ++i) {
        row = (q.row(i).transpose().array() - q(i, i)) / denom;
        row(i) = 0.0;
        total += log_sum_exp(row);
      }
      acc.add(total);
    }
    return acc;
  };
  const RunningMoments mom = run_rounds(opts, scale, body);

  RateEstimate out;
  out.mean = std::log2(static_cast<double>(k)) / static_cast<double>(t) - scale * mom.mean();
  out.std_error = scale * mom.stderr_of_mean();
  out.trials = mom.n;
  out.params = {{"sigma_v2", sigma_v2}, {"n_rx", n_rx}, {"codebook", codebook.digest()}};
  return out;
}

namespace {

/// Per-slot codewords s / sqrt(M), s in QAM^M, first antenna most significant.
CMat coherent_codewords(const QamConstellation& qam, int m) {
  if (m < 1) throw DomainError("coherent rate: M must be >= 1");
  const auto order = static_cast<Index>(qam.symbols.size());
  if (order < 2) throw DomainError("coherent rate: alphabet needs at least two symbols");
  Index count = 1;
  for (int a = 0; a < m; ++a) count *= order;
  if (count > 65536) throw DomainError("coherent rate: too many codewords");
  CMat s(count, m);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index idx = 0; idx < count; ++idx) {
    Index rest = idx;
    for (int a = m; a-- > 0;) {
      s(idx, a) = norm * qam.symbols[static_cast<std::size_t>(rest % order)];
      rest /= order;
    }
  }
  return s;
}

/// z_ij = ||A_i - c A_j + s V||^2 with A = S H; the log-likelihood ratio is
/// (z_ii - z_ij) / den.
RateEstimate coherent_rate_impl(const QamConstellation& qam, int m, int n_rx, double sigma_v2,
                                double c, double noise_amp, double den, const RateOptions& opts) {
  check_rate_inputs(sigma_v2, n_rx, opts);
  const CMat words = coherent_codewords(qam, m);
  const Index k = words.rows(), n = n_rx;
  const double scale = 1.0 / (static_cast<double>(k) * std::numbers::ln2);

  auto body = [&](std::uint64_t begin, std::uint64_t end) {
    RunningMoments acc;
    CMat h(m, n), v(1, n), a(k, n), ca(k, n), d(k, n);
    Eigen::VectorXd llr(k);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      GaussianSource rng(opts.seed, trial);
      fill_normal(rng, h);
      fill_normal(rng, v);
      a.noalias() = words * h;
      ca = c * a;
      double total = 0.0;
      for (Index i = 0; i < k; ++i) {
        const CMat yi = a.row(i) + noise_amp * v;
        d = (-ca).rowwise() + yi.row(0);
        const Eigen::VectorXd z = d.rowwise().squaredNorm();
        llr = (z(i) - z.array()) / den;
        llr(i) = 0.0;
        total += log_sum_exp(llr);
      }
      acc.add(total);
    }
    return acc;
  };
  const RunningMoments mom = run_rounds(opts, scale, body);

  RateEstimate out;
  out.mean = std::log2(static_cast<double>(k)) - scale * mom.mean();
  out.std_error = scale * mom.stderr_of_mean();
  out.trials = mom.n;
  out.params = {{"sigma_v2", sigma_v2}, {"n_rx", n_rx}, {"m", m}, {"qam_order", qam.order}};
  return out;
}

}  // namespace

RateEstimate coherent_rate_pcsi(const QamConstellation& qam, int m, int n_rx, double sigma_v2,
                                const RateOptions& opts) {
  RateEstimate out = coherent_rate_impl(qam, m, n_rx, sigma_v2, 1.0, std::sqrt(sigma_v2), sigma_v2, opts);
  out.params["beta"] = 0.0;
  return out;
}

RateEstimate coherent_rate_csi_error(const QamConstellation& qam, int m, int n_rx,
                                     double sigma_v2, double beta, const RateOptions& opts) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("coherent_rate_csi_error: beta must lie in [0, 1]");
  const double sigma_e2 = 2.0 * beta * beta / (1.0 + std::sqrt(1.0 - beta * beta));
  RateEstimate out = coherent_rate_impl(qam, m, n_rx, sigma_v2, std::sqrt(1.0 - beta * beta),
                                        std::sqrt(sigma_v2 + beta * beta), sigma_v2 + sigma_e2, opts);
  out.params = {{"sigma_v2", sigma_v2}, {"n_rx", n_rx}, {"m", m}, {"qam_order", qam.order},
                {"beta", beta}, {"sigma_e2", sigma_e2}};
  return out;
}

RateEstimate total_slot_rate(const RateEstimate& rg, const RateEstimate& re, const FrameLayout& frame) {
  if (frame.pilot_slots < 0 || frame.data_slots < 0 || frame.pilot_slots + frame.data_slots == 0)
    throw DomainError("total_slot_rate: invalid frame layout");
  const double p = frame.pilot_slots, d = frame.data_slots;
  RateEstimate out;
  out.mean = p * rg.mean + d * re.mean;
  out.std_error = std::sqrt(p * p * rg.std_error * rg.std_error + d * d * re.std_error * re.std_error);
  out.trials = std::max(rg.trials, re.trials);
  out.params = {{"pilot_slots", frame.pilot_slots}, {"data_slots", frame.data_slots}};
  return out;
}

RateEstimate training_total_rate(const RateEstimate& re, const FrameLayout& frame) {
  return total_slot_rate(RateEstimate{}, re, frame);
}

RateEstimate per_symbol(const RateEstimate& total, const FrameLayout& frame) {
  const double slots = frame.pilot_slots + frame.data_slots;
  if (!(slots > 0)) throw DomainError("per_symbol: empty frame");
  RateEstimate out = total;
  out.mean /= slots;
  out.std_error /= slots;
  return out;
}

}  // namespace dcrs
