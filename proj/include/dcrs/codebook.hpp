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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcrs/types.hpp"

namespace dcrs {

enum class Method { ExpMap, CubeSplit, Manopt, ManoptNmse, External };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Ordered Grassmann constellation. Index i carries the natural binary
/// label i. Immutable after construction.
class Codebook {
 public:
  /// Validates shape consistency, the Stiefel invariant of every point and
  /// |points| >= 2. Pairwise distinctness is checked separately by
  /// require_distinct() since it costs O(|points|^2).
  Codebook(std::vector<StiefelPoint> points, Method method, nlohmann::json params = {},
           std::string source_digest = {});

  Index t() const noexcept { return t_; }
  Index m() const noexcept { return m_; }
  std::size_t size() const noexcept { return points_.size(); }
  /// Largest B with 2^B <= |points| (equals log2 |points| for power-of-two sizes).
  int bits() const noexcept;
  Method method() const noexcept { return method_; }
  const nlohmann::json& params() const noexcept { return params_; }
  const std::string& source_digest() const noexcept { return source_digest_; }

  const std::vector<StiefelPoint>& points() const noexcept { return points_; }
  const StiefelPoint& operator[](std::size_t i) const { return points_[i]; }

  /// All points side by side: T x (|points| * M), point i in columns [iM, iM+M).
  const CMat& stacked() const noexcept { return stacked_; }

  /// SHA-256 (hex) of the shape and the 17-significant-digit entries.
  const std::string& digest() const noexcept { return digest_; }

  /// Throws DegenerateInput if any pair is closer than `min_distance`.
  void require_distinct(double min_distance = 1e-9) const;

 private:
  std::vector<StiefelPoint> points_;
  Index t_ = 0;
  Index m_ = 0;
  Method method_;
  nlohmann::json params_;
  std::string source_digest_;
  CMat stacked_;
  std::string digest_;
};

/// Minimum chordal distance over unordered pairs. Requires >= 2 points.
double min_chordal_distance(std::span<const StiefelPoint> points);
double min_chordal_distance(const Codebook& codebook);

/// log2 |points| / T in bit per channel use.
double rate_of(const Codebook& codebook);

/// Current codebook file format version.
inline constexpr int kCodebookFormatVersion = 1;

nlohmann::json codebook_to_json(const Codebook& codebook);
Codebook codebook_from_json(const nlohmann::json& doc);

void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace dcrs
