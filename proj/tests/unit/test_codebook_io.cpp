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

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "dcrs/codebook.hpp"
#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/manifold.hpp"
#include "dcrs/rng.hpp"

using namespace dcrs;

namespace {

Codebook random_codebook(std::size_t n, Index t, Index m, std::uint64_t seed) {
  std::vector<StiefelPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianSource rng(seed, i);
    pts.push_back(random_stiefel(t, m, rng));
  }
  return Codebook(std::move(pts), Method::External, {{"seed", seed}});
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dcrs_test_" + name);
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("codebook invariants") {
  std::vector<StiefelPoint> one{StiefelPoint(identity_block(2, 1))};
  CHECK_THROWS_AS(Codebook(one, Method::External), DegenerateInput);

  std::vector<StiefelPoint> mixed{StiefelPoint(identity_block(2, 1)), StiefelPoint(identity_block(3, 1))};
  CHECK_THROWS_AS(Codebook(mixed, Method::External), DimensionMismatch);

  std::vector<StiefelPoint> dup{StiefelPoint(identity_block(2, 1)),
                                StiefelPoint(CMat(cplx(0, 1) * identity_block(2, 1)))};
  const Codebook cb(dup, Method::External);
  CHECK_THROWS_AS(cb.require_distinct(), DegenerateInput);
}

TEST_CASE("bits and stacked layout") {
  const Codebook cb = random_codebook(6, 4, 2, 1);
  CHECK(cb.bits() == 2);
  CHECK(cb.stacked().rows() == 4);
  CHECK(cb.stacked().cols() == 12);
  CHECK(cb.stacked().middleCols(6, 2) == cb[3].mat());
}

TEST_CASE("JSON round trip is bit-exact") {
  for (Index m : {1, 2}) {
    const Codebook cb = random_codebook(16, 4, m, 3 + static_cast<std::uint64_t>(m));
    const auto path = temp_file("roundtrip.json");
    save_codebook(cb, path);
    const Codebook back = load_codebook(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == cb.size());
    for (std::size_t i = 0; i < cb.size(); ++i) CHECK(back[i].mat() == cb[i].mat());
    CHECK(back.digest() == cb.digest());
    CHECK(back.method() == cb.method());
    CHECK(back.params() == cb.params());
  }
}

TEST_CASE("cube-split file round trip keeps the digest") {
  CubeSplitParams p;
  p.t = 2;
  p.bits_per_coord = {1, 1};
  const Codebook cb = build_cubesplit(p);
  const Codebook back = codebook_from_json(nlohmann::json::parse(codebook_to_json(cb).dump()));
  CHECK(back.digest() == cb.digest());
}

TEST_CASE("malformed codebook documents are rejected") {
  const Codebook cb = random_codebook(4, 2, 1, 9);
  const nlohmann::json good = codebook_to_json(cb);

  auto doc = good;
  doc["digest"] = std::string(64, '0');
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  doc = good;
  doc["format_version"] = kCodebookFormatVersion + 1;
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  doc = good;
  doc["format"] = "something-else";
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  doc = good;
  doc["size"] = 5;
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  doc = good;
  doc.erase("points");
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  doc = good;
  doc["method"] = "mystery";
  CHECK_THROWS_AS(codebook_from_json(doc), FormatError);

  const auto path = temp_file("garbage.json");
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_codebook(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("digest depends on content") {
  const Codebook a = random_codebook(4, 4, 1, 1);
  const Codebook b = random_codebook(4, 4, 1, 2);
  CHECK(a.digest() != b.digest());
  CHECK(a.digest() == random_codebook(4, 4, 1, 1).digest());
  CHECK(a.digest().size() == 64);
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::ExpMap, Method::CubeSplit, Method::Manopt, Method::ManoptNmse, Method::External})
    CHECK(method_from_string(to_string(m)) == m);
}
