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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcrs/channel.hpp"
#include "dcrs/codebook.hpp"
#include "dcrs/rates.hpp"

namespace dcrs {

struct SnrGrid {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  /// start, start + step, ... up to stop inclusive (with a 1e-9 step slack).
  std::vector<double> points() const;
};

struct SchemeSpec {
  std::string name;
  /// Training baseline with a seeded QPSK pilot instead of a codebook.
  bool training = false;
  /// Codebook build spec ({"method": ..., ...}) or empty when `file` is set.
  nlohmann::json codebook;
  std::filesystem::path file;
  /// Apply the estimation-error rotation after building/loading.
  bool rotate = false;
};

struct RateSettings {
  std::uint64_t max_trials = 20000;
  std::uint64_t min_trials = 500;
  std::uint64_t round_trials = 500;
  double stderr_target = 0.02;
};

struct ExperimentConfig {
  std::string scenario;
  int m = 1;
  int n = 1;
  int t = 4;
  int bits = 8;
  std::uint64_t seed = 0;
  SnrGrid snr;
  EstimatorMode estimator = EstimatorMode::ZF;
  double kappa = 1.0;
  /// Monte Carlo blocks per SNR point for NMSE and SER.
  std::uint64_t trials = 100000;
  RateSettings rate;
  FrameLayout frame;
  int qam_order = 16;
  /// Fixed CSI-error levels for rate-e sweeps; empty means "derive from NMSE".
  std::vector<double> betas;
  /// Build spec used by the build subcommand.
  nlohmann::json codebook;
  std::vector<SchemeSpec> schemes;
  std::map<std::string, std::filesystem::path> outputs;
  unsigned workers = 1;
  /// Directory that relative paths in the config are resolved against.
  std::filesystem::path base_dir;
  /// Normalised document the digest is computed from.
  nlohmann::json document;

  /// SHA-256 of the canonical document without worker count and output paths.
  std::string digest() const;
};

/// Parses a config document (JSON, comments allowed). Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<double> stderr_target;
  std::optional<unsigned> workers;
};

/// Applies command-line overrides; seed, trials and stderr target enter the digest.
ExperimentConfig apply_overrides(const ExperimentConfig& cfg, const ConfigOverrides& o);

/// Builds the codebook described by `spec` ({"method": "exp-map" | "cube-split" |
/// "manopt", ...}) for the (T, M, B) of the config.
Codebook build_codebook(const nlohmann::json& spec, const ExperimentConfig& cfg);

struct CodebookReport {
  std::string digest;
  std::string method;
  Index t = 0;
  Index m = 0;
  std::size_t size = 0;
  int bits = 0;
  double mcd = 0.0;
  double rate = 0.0;
  /// Union-bound SER at 10, 15 and 20 dB.
  std::vector<std::pair<double, double>> union_bound;
  nlohmann::json to_json() const;
};

CodebookReport codebook_report(const Codebook& codebook, int n_rx);

struct Scheme {
  std::string name;
  std::optional<Codebook> codebook;
  CMat pilot;
  /// Codebook digest, or "training".
  std::string label() const;
};

std::vector<Scheme> prepare_schemes(const ExperimentConfig& cfg, std::ostream* log = nullptr);

enum class SweepKind { Nmse, Ser, RateG, RateE, Total };

std::string to_string(SweepKind kind);
SweepKind sweep_kind_from_string(const std::string& s);

/// Runs a sweep into `out` as CSV. An existing file with the same config
/// digest is resumed from the first incomplete SNR point; a different digest
/// raises ConfigError.
void run_sweep(const ExperimentConfig& cfg, SweepKind kind, const std::filesystem::path& out,
               std::ostream* log = nullptr);

struct CsvTable {
  /// "# key: value" lines in file order.
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string meta_value(const std::string& key) const;
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// First sign change of diff = a - b along the grid, linearly interpolated.
std::optional<double> find_crossing(const std::vector<double>& snr, const std::vector<double>& a,
                                    const std::vector<double>& b);

}  // namespace dcrs
