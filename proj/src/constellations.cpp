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

#include "dcrs/constellations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"
#include "dcrs/rng.hpp"

namespace dcrs {

std::string to_string(SymbolAlphabet a) { return a == SymbolAlphabet::Qam ? "qam" : "psk"; }

SymbolAlphabet alphabet_from_string(const std::string& s) {
  if (s == "qam") return SymbolAlphabet::Qam;
  if (s == "psk") return SymbolAlphabet::Psk;
  throw ConfigError("unknown symbol alphabet '" + s + "'");
}

std::vector<cplx> symbol_alphabet(SymbolAlphabet alphabet, int order) {
  if (order < 1) throw DomainError("symbol_alphabet: order must be >= 1");
  if (order == 1) return {cplx(0.0, 0.0)};
  if (order == 2) return {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(order));
  if (alphabet == SymbolAlphabet::Psk) {
    for (int k = 0; k < order; ++k) out.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / order));
    return out;
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (side * side != order)
    throw DomainError("symbol_alphabet: QAM order " + std::to_string(order) + " is not a square");
  // Average energy of the odd-integer grid is 2(L - 1)/3.
  const double norm = std::sqrt(2.0 * (order - 1) / 3.0);
  for (int re = 0; re < side; ++re)
    for (int im = 0; im < side; ++im)
      out.emplace_back((2.0 * re - (side - 1)) / norm, (2.0 * im - (side - 1)) / norm);
  return out;
}

namespace {

Index expmap_symbol_count(Index t, Index m) {
  if (m < 1 || t <= m) throw DimensionMismatch("exp-map: need T > M >= 1");
  if (m == 1) return t - 1;
  if (m == 2 && t == 4) return 4;
  throw UnsupportedShape("exp-map: no symbol mapping for (M, T) = (" + std::to_string(m) + ", " +
                         std::to_string(t) + ")");
}

void validate(const ExpMapParams& p) {
  const Index nsym = expmap_symbol_count(p.t, p.m);
  if (static_cast<Index>(p.per_symbol_orders.size()) != nsym)
    throw DimensionMismatch("exp-map: expected " + std::to_string(nsym) + " symbol orders");
  std::uint64_t product = 1;
  for (int o : p.per_symbol_orders) {
    if (o < 1) throw DomainError("exp-map: symbol orders must be >= 1");
    product *= static_cast<std::uint64_t>(o);
    if (product > (std::uint64_t{1} << 24)) throw DomainError("exp-map: codebook too large");
  }
  if ((product & (product - 1)) != 0) throw DomainError("exp-map: order product must be a power of two");
  if (product < 2) throw DomainError("exp-map: need at least two points");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw DomainError("exp-map: scale must be positive");
}

/// Raw points without codebook validation (used by the scale search).
std::vector<CMat> expmap_raw_points(const ExpMapParams& p) {
  const std::size_t nsym = p.per_symbol_orders.size();
  std::vector<std::vector<cplx>> alphabets;
  std::size_t total = 1;
  for (int o : p.per_symbol_orders) {
    alphabets.push_back(symbol_alphabet(p.alphabet, o));
    total *= static_cast<std::size_t>(o);
  }
  std::vector<CMat> out;
  out.reserve(total);
  std::vector<cplx> symbols(nsym);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t s = nsym; s-- > 0;) {
      const auto order = static_cast<std::size_t>(p.per_symbol_orders[s]);
      symbols[s] = p.scale * alphabets[s][rest % order];
      rest /= order;
    }
    out.push_back(expmap_point(expmap_generator(p.t, p.m, symbols), p.t));
  }
  return out;
}

double raw_min_distance(const std::vector<CMat>& points) {
  const Index m = points.front().cols();
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d2 = static_cast<double>(m) - (points[i].adjoint() * points[j]).squaredNorm();
      best2 = std::min(best2, d2);
    }
  return std::sqrt(std::max(0.0, best2));
}

nlohmann::json expmap_json(const ExpMapParams& p) {
  return {{"t", p.t},
          {"m", p.m},
          {"per_symbol_orders", p.per_symbol_orders},
          {"alphabet", to_string(p.alphabet)},
          {"scale", p.scale}};
}

}  // namespace

CMat expmap_generator(Index t, Index m, std::span<const cplx> symbols) {
  const Index nsym = expmap_symbol_count(t, m);
  if (static_cast<Index>(symbols.size()) != nsym)
    throw DimensionMismatch("expmap_generator: wrong number of symbols");
  if (m == 1) {
    CMat c(1, t - 1);
    for (Index k = 0; k < t - 1; ++k) c(0, k) = symbols[static_cast<std::size_t>(k)];
    return c;
  }
  const cplx theta = std::polar(1.0, std::numbers::pi / 4.0);
  const cplx phi = std::polar(1.0, std::numbers::pi / 8.0);
  const cplx s1 = symbols[0], s2 = symbols[1], s3 = symbols[2], s4 = symbols[3];
  CMat c(2, 2);
  c << s1 + theta * s2, phi * (s3 + theta * s4),
       phi * (s3 - theta * s4), s1 - theta * s2;
  return c;
}

CMat expmap_point(const CMat& c, Index t) {
  if (c.rows() + c.cols() != t) throw DimensionMismatch("expmap_point: C must be M x (T - M)");
  return skew_block_exp(c).mat().leftCols(c.rows());
}

Codebook build_expmap(const ExpMapParams& params) {
  validate(params);
  std::vector<StiefelPoint> points;
  for (auto& x : expmap_raw_points(params)) points.emplace_back(std::move(x));
  Codebook cb(std::move(points), Method::ExpMap, expmap_json(params));
  cb.require_distinct();
  return cb;
}

double tune_expmap_scale(const ExpMapParams& params, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("tune_expmap_scale: empty grid");
  double best_scale = grid.front();
  double best_mcd = -1.0;
  for (double s : grid) {
    double mcd = 0.0;
    if (s > 0.0 && std::isfinite(s)) {
      ExpMapParams p = params;
      p.scale = s;
      validate(p);
      mcd = raw_min_distance(expmap_raw_points(p));
    }
    if (mcd > best_mcd || (mcd == best_mcd && s < best_scale)) {
      best_mcd = mcd;
      best_scale = s;
    }
  }
  return best_scale;
}

ExpMapParams default_expmap_params(Index t, Index m, int bits) {
  const Index nsym = expmap_symbol_count(t, m);
  if (bits < 1) throw DomainError("default_expmap_params: bits must be >= 1");
  std::vector<int> sym_bits(static_cast<std::size_t>(nsym), bits / static_cast<int>(nsym));
  for (int k = 0; k < bits % static_cast<int>(nsym); ++k) ++sym_bits[static_cast<std::size_t>(k)];
  if (m == 2 && bits == 4) {
    // Four BPSK symbols give a smaller MCD than QPSK on s1 and s3 with s2 = s4 = 0.
    sym_bits = {2, 0, 2, 0};
  }
  ExpMapParams p;
  p.t = t;
  p.m = m;
  bool qam_ok = true;
  for (int b : sym_bits) {
    p.per_symbol_orders.push_back(1 << b);
    if (b % 2 == 1 && b != 1) qam_ok = false;
  }
  p.alphabet = qam_ok ? SymbolAlphabet::Qam : SymbolAlphabet::Psk;
  std::vector<double> grid;
  for (int k = 1; k <= 200; ++k) grid.push_back(0.01 * k);
  p.scale = tune_expmap_scale(p, grid);
  return p;
}

// ---------------------------------------------------------------------------

CubeSplitParams cubesplit_even_params(Index t, int coord_bits) {
  if (t < 2) throw DomainError("cube-split: need T >= 2");
  if (coord_bits < 0) throw DomainError("cube-split: negative bit budget");
  const int ncoord = static_cast<int>(2 * (t - 1));
  CubeSplitParams p;
  p.t = t;
  p.bits_per_coord.assign(static_cast<std::size_t>(ncoord), coord_bits / ncoord);
  for (int k = 0; k < coord_bits % ncoord; ++k) ++p.bits_per_coord[static_cast<std::size_t>(k)];
  return p;
}

CubeSplitParams cubesplit_params_for_bits(Index t, int bits) {
  if (t < 2 || (t & (t - 1)) != 0)
    throw DomainError("cube-split: a power-of-two cardinality needs T to be a power of two");
  int log2t = 0;
  while ((Index{1} << log2t) < t) ++log2t;
  if (bits < log2t) throw DomainError("cube-split: bits must be at least log2(T)");
  return cubesplit_even_params(t, bits - log2t);
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse_normal_cdf: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

cplx cubesplit_xi(double a1, double a2) {
  const cplx w(inverse_normal_cdf(a1), inverse_normal_cdf(a2));
  const double r = std::abs(w);
  if (r == 0.0) return {0.0, 0.0};
  // (1 - e^{-x}) / (1 + e^{-x}) = tanh(x / 2) with x = |w|^2 / 2.
  return std::sqrt(std::tanh(0.25 * r * r)) * (w / r);
}

Codebook build_cubesplit(const CubeSplitParams& params) {
  const Index t = params.t;
  if (t < 2) throw DomainError("cube-split: need T >= 2");
  if (static_cast<Index>(params.bits_per_coord.size()) != 2 * (t - 1))
    throw DimensionMismatch("cube-split: need 2(T - 1) coordinate bit counts");
  int total_bits = 0;
  for (int b : params.bits_per_coord) {
    if (b < 0) throw DomainError("cube-split: negative coordinate bits");
    total_bits += b;
  }
  if (total_bits > 20) throw DomainError("cube-split: codebook too large");

  const std::size_t ncoord = params.bits_per_coord.size();
  std::vector<std::vector<double>> grids(ncoord);
  for (std::size_t j = 0; j < ncoord; ++j) {
    const int b = params.bits_per_coord[j];
    const double denom = std::ldexp(1.0, b + 1);
    for (int k = 0; k < (1 << b); ++k) grids[j].push_back((2.0 * k + 1.0) / denom);
  }
  const std::size_t ngrid = std::size_t{1} << total_bits;

  // t-vectors for every grid point, a_1 most significant.
  std::vector<CVec> tvecs;
  tvecs.reserve(ngrid);
  std::vector<double> a(ncoord);
  for (std::size_t g = 0; g < ngrid; ++g) {
    std::size_t rest = g;
    for (std::size_t j = ncoord; j-- > 0;) {
      const std::size_t n = grids[j].size();
      a[j] = grids[j][rest % n];
      rest /= n;
    }
    CVec tv(t - 1);
    for (Index k = 0; k < t - 1; ++k)
      tv(k) = cubesplit_xi(a[static_cast<std::size_t>(2 * k)], a[static_cast<std::size_t>(2 * k + 1)]);
    tvecs.push_back(std::move(tv));
  }

  std::vector<StiefelPoint> points;
  points.reserve(static_cast<std::size_t>(t) * ngrid);
  for (Index i = 0; i < t; ++i)
    for (const CVec& tv : tvecs) {
      CMat g(t, 1);
      g.block(0, 0, i, 1) = tv.head(i);
      g(i, 0) = 1.0;
      g.block(i + 1, 0, t - 1 - i, 1) = tv.tail(t - 1 - i);
      g /= std::sqrt(1.0 + tv.squaredNorm());
      points.emplace_back(std::move(g));
    }
  // Distinct by construction: |t_k| < 1 rules out coincidences across i, and
  // the coordinate map is injective within one i.
  return Codebook(std::move(points), Method::CubeSplit,
                  {{"t", t}, {"bits_per_coord", params.bits_per_coord}});
}

// ---------------------------------------------------------------------------

namespace {

CMat stack_tuple(const PointTuple& pts) {
  const Index t = pts.front().rows();
  const Index m = pts.front().cols();
  CMat s(t, m * static_cast<Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) s.middleCols(static_cast<Index>(i) * m, m) = pts[i];
  return s;
}

}  // namespace

double mcd_surrogate(const PointTuple& points, double epsilon, PointTuple* grad) {
  if (points.size() < 2) throw DegenerateInput("mcd_surrogate: need at least two points");
  if (!(epsilon > 0.0)) throw DomainError("mcd_surrogate: epsilon must be positive");
  const Index n = static_cast<Index>(points.size());
  const Index m = points.front().cols();
  const CMat s = stack_tuple(points);
  const CMat gram = s.adjoint() * s;

  // Pair exponents z_ij, filled for i < j.
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(n, n, -std::numeric_limits<double>::infinity());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  double zmax = -std::numeric_limits<double>::infinity();
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      if (m == 1) {
        d(i, j) = std::abs(gram(i, j));
        z(i, j) = d(i, j) / epsilon;
      } else {
        const double g2 = gram.block(i * m, j * m, m, m).squaredNorm();
        d(i, j) = std::sqrt(std::max(0.0, 2.0 * (static_cast<double>(m) - g2)));
        z(i, j) = -d(i, j) / epsilon;
      }
      zmax = std::max(zmax, z(i, j));
    }
  double sum = 0.0;
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) sum += std::exp(z(i, j) - zmax);
  const double value = epsilon * (zmax + std::log(sum));
  if (grad == nullptr) return value;

  // Gradient of point i is sum_j c_ij X_j G_ji; assembled as S * B with B
  // holding the scaled Gram blocks.
  CMat b = CMat::Zero(n * m, n * m);
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const double w = std::exp(z(i, j) - zmax) / sum;
      double c = 0.0;
      if (m == 1) {
        if (d(i, j) > 0.0) c = w / d(i, j);
      } else {
        // Distance zero only for coincident subspaces; the gradient is then undefined.
        if (d(i, j) > 1e-300) c = 2.0 * w / d(i, j);
      }
      if (c == 0.0) continue;
      b.block(j * m, i * m, m, m) = c * gram.block(j * m, i * m, m, m);
      b.block(i * m, j * m, m, m) = c * gram.block(i * m, j * m, m, m);
    }
  const CMat g = s * b;
  grad->resize(points.size());
  for (Index i = 0; i < n; ++i) (*grad)[static_cast<std::size_t>(i)] = g.middleCols(i * m, m);
  return value;
}

std::vector<StiefelPoint> manopt_initial_points(std::size_t size, Index t, Index m,
                                                std::uint64_t seed) {
  const std::uint64_t init_seed = derive_seed(seed, "manopt-init");
  std::vector<StiefelPoint> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    GaussianSource rng(init_seed, i);
    out.push_back(random_stiefel(t, m, rng));
  }
  return out;
}

Codebook build_manopt(std::size_t size, Index t, Index m, std::uint64_t seed,
                      const ManoptOptions& opts) {
  if (size < 2) throw DomainError("build_manopt: size must be >= 2");
  if (m < 1 || t < m) throw DimensionMismatch("build_manopt: need T >= M >= 1");
  if (opts.epsilon_schedule.empty()) throw DomainError("build_manopt: empty epsilon schedule");
  for (double e : opts.epsilon_schedule)
    if (!(e > 0.0)) throw DomainError("build_manopt: epsilon must be positive");

  std::vector<StiefelPoint> best = manopt_initial_points(size, t, m, seed);
  double best_mcd = min_chordal_distance(best);
  PointTuple x;
  for (const auto& p : best) x.push_back(p.mat());

  const std::vector<ManifoldFactor> factors(size, ManifoldFactor{FactorKind::Grassmann, t, m});
  for (double eps : opts.epsilon_schedule) {
    const Objective f = [eps](const PointTuple& pts, PointTuple* g) {
      return mcd_surrogate(pts, eps, g);
    };
    OptimizerResult res = minimize_on_manifold(f, factors, x, opts.optimizer);
    x = std::move(res.point);
    std::vector<StiefelPoint> stage;
    stage.reserve(size);
    for (const auto& p : x) stage.emplace_back(qr_orthonormalize(p));
    const double mcd = min_chordal_distance(stage);
    if (mcd > best_mcd) {
      best_mcd = mcd;
      best = std::move(stage);
    }
  }

  nlohmann::json params = {{"t", t},
                           {"m", m},
                           {"size", size},
                           {"seed", seed},
                           {"epsilon_schedule", opts.epsilon_schedule},
                           {"max_iterations", opts.optimizer.max_iterations},
                           {"rule", opts.optimizer.rule == DescentRule::Steepest ? "steepest" : "cg"}};
  Codebook cb(std::move(best), Method::Manopt, std::move(params));
  cb.require_distinct();
  return cb;
}

}  // namespace dcrs
