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

#include "dcrs/codebook.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/evp.h>

#include "dcrs/errors.hpp"

namespace dcrs {

std::string to_string(Method m) {
  switch (m) {
    case Method::ExpMap: return "exp-map";
    case Method::CubeSplit: return "cube-split";
    case Method::Manopt: return "manopt";
    case Method::ManoptNmse: return "manopt-nmse";
    case Method::External: return "external";
  }
  return "external";
}

Method method_from_string(const std::string& s) {
  if (s == "exp-map") return Method::ExpMap;
  if (s == "cube-split") return Method::CubeSplit;
  if (s == "manopt") return Method::Manopt;
  if (s == "manopt-nmse") return Method::ManoptNmse;
  if (s == "external") return Method::External;
  throw FormatError("unknown codebook method '" + s + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256_hex: digest computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[md[k] >> 4]);
    out.push_back(kHex[md[k] & 0xf]);
  }
  return out;
}

namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string content_digest(Index t, Index m, const std::vector<StiefelPoint>& points) {
  std::string text = "dcrs-codebook t=" + std::to_string(t) + " m=" + std::to_string(m) +
                     " n=" + std::to_string(points.size()) + "\n";
  for (const auto& p : points)
    for (Index r = 0; r < t; ++r)
      for (Index c = 0; c < m; ++c) {
        const cplx z = p.mat()(r, c);
        text += format_g17(z.real());
        text += ' ';
        text += format_g17(z.imag());
        text += '\n';
      }
  return sha256_hex(text);
}

/// Squared chordal distances from point i to all points (M - ||X_i^H X_j||_F^2).
Eigen::VectorXd squared_distances_from(const CMat& stacked, Index m, Index i) {
  const Index n = stacked.cols() / m;
  const CMat row = stacked.middleCols(i * m, m).adjoint() * stacked;
  Eigen::VectorXd d2(n);
  for (Index j = 0; j < n; ++j)
    d2(j) = std::max(0.0, static_cast<double>(m) - row.middleCols(j * m, m).squaredNorm());
  return d2;
}

CMat stack_points(std::span<const StiefelPoint> points) {
  const Index t = points.front().t();
  const Index m = points.front().m();
  CMat out(t, m * static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    out.middleCols(static_cast<Index>(i) * m, m) = points[i].mat();
  return out;
}

}  // namespace

Codebook::Codebook(std::vector<StiefelPoint> points, Method method, nlohmann::json params,
                   std::string source_digest)
    : points_(std::move(points)),
      method_(method),
      params_(std::move(params)),
      source_digest_(std::move(source_digest)) {
  if (points_.size() < 2) throw DegenerateInput("Codebook: need at least two points");
  t_ = points_.front().t();
  m_ = points_.front().m();
  for (const auto& p : points_)
    if (p.t() != t_ || p.m() != m_)
      throw DimensionMismatch("Codebook: points have inconsistent (T, M)");
  stacked_ = stack_points(points_);
  digest_ = content_digest(t_, m_, points_);
}

int Codebook::bits() const noexcept {
  int b = 0;
  while ((std::size_t{1} << (b + 1)) <= points_.size()) ++b;
  return b;
}

void Codebook::require_distinct(double min_distance) const {
  const double thr2 = min_distance * min_distance;
  for (Index i = 0; i + 1 < static_cast<Index>(size()); ++i) {
    const Eigen::VectorXd d2 = squared_distances_from(stacked_, m_, i);
    for (Index j = i + 1; j < d2.size(); ++j)
      if (d2(j) <= thr2)
        throw DegenerateInput("Codebook: points " + std::to_string(i) + " and " +
                              std::to_string(j) + " span the same subspace");
  }
}

double min_chordal_distance(std::span<const StiefelPoint> points) {
  if (points.size() < 2) throw DegenerateInput("min_chordal_distance: need at least two points");
  const Index m = points.front().m();
  for (const auto& p : points)
    if (p.t() != points.front().t() || p.m() != m)
      throw DimensionMismatch("min_chordal_distance: inconsistent (T, M)");
  const CMat stacked = stack_points(points);
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i + 1 < static_cast<Index>(points.size()); ++i) {
    const Eigen::VectorXd d2 = squared_distances_from(stacked, m, i);
    best = std::min(best, d2.tail(d2.size() - i - 1).minCoeff());
  }
  return std::sqrt(best);
}

double min_chordal_distance(const Codebook& codebook) {
  return min_chordal_distance(std::span<const StiefelPoint>(codebook.points()));
}

double rate_of(const Codebook& codebook) {
  return std::log2(static_cast<double>(codebook.size())) / static_cast<double>(codebook.t());
}

nlohmann::json codebook_to_json(const Codebook& cb) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : cb.points()) {
    nlohmann::json entries = nlohmann::json::array();
    for (Index r = 0; r < cb.t(); ++r)
      for (Index c = 0; c < cb.m(); ++c) entries.push_back({p.mat()(r, c).real(), p.mat()(r, c).imag()});
    points.push_back(std::move(entries));
  }
  nlohmann::json doc;
  doc["format"] = "dcrs-codebook";
  doc["format_version"] = kCodebookFormatVersion;
  doc["method"] = to_string(cb.method());
  doc["t"] = cb.t();
  doc["m"] = cb.m();
  doc["bits"] = cb.bits();
  doc["size"] = cb.size();
  doc["params"] = cb.params().is_null() ? nlohmann::json::object() : cb.params();
  if (!cb.source_digest().empty()) doc["source_digest"] = cb.source_digest();
  doc["digest"] = cb.digest();
  doc["points"] = std::move(points);
  return doc;
}

Codebook codebook_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "dcrs-codebook")
      throw FormatError("codebook: unexpected format tag");
    const int version = doc.at("format_version").get<int>();
    if (version != kCodebookFormatVersion)
      throw FormatError("codebook: unsupported format_version " + std::to_string(version));
    const Index t = doc.at("t").get<Index>();
    const Index m = doc.at("m").get<Index>();
    const auto& pts = doc.at("points");
    if (pts.size() != doc.at("size").get<std::size_t>())
      throw FormatError("codebook: size field does not match the number of points");

    std::vector<StiefelPoint> points;
    points.reserve(pts.size());
    for (const auto& entries : pts) {
      if (entries.size() != static_cast<std::size_t>(t * m))
        throw FormatError("codebook: point has the wrong number of entries");
      CMat x(t, m);
      std::size_t k = 0;
      for (Index r = 0; r < t; ++r)
        for (Index c = 0; c < m; ++c, ++k)
          x(r, c) = cplx(entries[k].at(0).get<double>(), entries[k].at(1).get<double>());
      points.emplace_back(std::move(x));
    }
    Codebook cb(std::move(points), method_from_string(doc.at("method").get<std::string>()),
                doc.value("params", nlohmann::json::object()), doc.value("source_digest", std::string{}));
    if (doc.contains("digest") && doc["digest"].get<std::string>() != cb.digest())
      throw FormatError("codebook: content digest mismatch");
    return cb;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("codebook: malformed document: ") + e.what());
  }
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("save_codebook: cannot open " + path.string());
  out << codebook_to_json(codebook).dump(1) << '\n';
  if (!out) throw Error("save_codebook: write failed for " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_codebook: cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("load_codebook: " + path.string() + ": " + e.what());
  }
  return codebook_from_json(doc);
}

}  // namespace dcrs
