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

// Command-line front end: build, rotate, sweep and inspect.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcrs/codebook.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/experiment.hpp"
#include "dcrs/nmse_opt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<double> stderr_target;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment config (JSON, comments allowed)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--seed", f.seed, "override the master seed");
  cmd->add_option("--trials", f.trials, "override Monte Carlo trials per SNR point");
  cmd->add_option("--stderr-target", f.stderr_target, "override the rate standard-error target");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
}

dcrs::ExperimentConfig config_from(const CommonFlags& f) {
  const dcrs::ExperimentConfig base = dcrs::load_config(f.config);
  return dcrs::apply_overrides(base, {f.seed, f.trials, f.stderr_target, f.workers});
}

std::filesystem::path output_path(const CommonFlags& f, const dcrs::ExperimentConfig& cfg,
                                  const std::string& key) {
  if (!f.out.empty()) return f.out;
  const auto it = cfg.outputs.find(key);
  if (it == cfg.outputs.end())
    throw dcrs::ConfigError("no --out given and config has no outputs." + key + " entry");
  return it->second;
}

void write_report(const dcrs::Codebook& cb, int n_rx, const std::filesystem::path& path,
                  nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json report = dcrs::codebook_report(cb, n_rx).to_json();
  for (auto& [k, v] : extra.items()) report[k] = v;
  report["file"] = path.string();
  std::ofstream(path.string() + ".report.json") << report.dump(2) << '\n';
  std::cout << report.dump(2) << std::endl;
}

int cmd_build(const CommonFlags& f) {
  const dcrs::ExperimentConfig cfg = config_from(f);
  if (cfg.codebook.empty()) throw dcrs::ConfigError("config has no 'codebook' section to build");
  const std::filesystem::path out = output_path(f, cfg, "codebook");
  const dcrs::Codebook cb = dcrs::build_codebook(cfg.codebook, cfg);
  dcrs::save_codebook(cb, out);
  write_report(cb, cfg.n, out);
  return kExitOk;
}

int cmd_rotate(const CommonFlags& f, const std::string& in, int n_rx) {
  std::optional<dcrs::ExperimentConfig> cfg;
  if (!f.config.empty()) cfg = config_from(f);
  const int n = cfg ? cfg->n : n_rx;
  const std::filesystem::path out =
      !f.out.empty() ? std::filesystem::path(f.out) : std::filesystem::path(in).replace_extension(".rotated.json");
  const dcrs::Codebook src = dcrs::load_codebook(in);
  const dcrs::Codebook rotated = dcrs::optimize_unitary_rotations(src);
  dcrs::save_codebook(rotated, out);
  const double delta = std::abs(dcrs::min_chordal_distance(rotated) - dcrs::min_chordal_distance(src));
  const nlohmann::json& p = rotated.params();
  write_report(rotated, n, out,
               {{"delta_mcd", delta},
                {"objective_before", p.value("objective_before", 0.0)},
                {"objective_after", p.value("objective_after", 0.0)},
                {"iterations", p.value("iterations", 0)},
                {"excluded_pairs", p.value("excluded_pairs", nlohmann::json::array())}});
  if (delta >= 1e-10) {
    std::cerr << "rotation changed the minimum chordal distance by " << delta << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::string& kind_name) {
  const dcrs::ExperimentConfig cfg = config_from(f);
  const dcrs::SweepKind kind = dcrs::sweep_kind_from_string(kind_name);
  const std::filesystem::path out = output_path(f, cfg, kind_name);
  dcrs::run_sweep(cfg, kind, out, &std::cerr);
  std::cerr << "wrote " << out.string() << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& in, int n_rx) {
  const dcrs::Codebook cb = dcrs::load_codebook(in);
  nlohmann::json report = dcrs::codebook_report(cb, n_rx).to_json();
  report["params"] = cb.params();
  if (!cb.source_digest().empty()) report["source_digest"] = cb.source_digest();
  std::cout << report.dump(2) << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmann DC-RS constellations and experiment runner", "dcrs"};
  app.require_subcommand(1);

  CommonFlags build_flags, rotate_flags, sweep_flags;
  auto* build = app.add_subcommand("build", "build the codebook described in the config");
  add_common(build, build_flags, true);

  std::string rotate_in;
  int rotate_n = 1;
  auto* rotate = app.add_subcommand("rotate", "apply the NMSE-minimizing unitary rotations to a codebook");
  add_common(rotate, rotate_flags, false);
  rotate->add_option("--in", rotate_in, "input codebook")->required()->check(CLI::ExistingFile);
  rotate->add_option("--rx", rotate_n, "receive antennas for the report (without --config)");

  std::string sweep_kind;
  auto* sweep = app.add_subcommand("sweep", "run an SNR sweep into a CSV file");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("kind", sweep_kind, "nmse | ser | rate-g | rate-e | total")
      ->required()
      ->check(CLI::IsMember({"nmse", "ser", "rate-g", "rate-e", "total"}));

  std::string inspect_in;
  int inspect_n = 1;
  auto* inspect = app.add_subcommand("inspect", "print the report of a codebook file");
  inspect->add_option("--in", inspect_in, "codebook file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--rx", inspect_n, "receive antennas for the union bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*build) return cmd_build(build_flags);
    if (*rotate) return cmd_rotate(rotate_flags, rotate_in, rotate_n);
    if (*sweep) return cmd_sweep(sweep_flags, sweep_kind);
    if (*inspect) return cmd_inspect(inspect_in, inspect_n);
  } catch (const dcrs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dcrs::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dcrs::NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const dcrs::SingularPair& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
