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

#include "dcrs/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dcrs/constellations.hpp"
#include "dcrs/errors.hpp"
#include "dcrs/nmse_opt.hpp"
#include "dcrs/nmse_sim.hpp"
#include "dcrs/rng.hpp"

namespace dcrs {

std::vector<double> SnrGrid::points() const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw ConfigError("snr_db: values must be finite");
  if (!(step > 0.0)) throw ConfigError("snr_db: step must be positive");
  if (stop < start) throw ConfigError("snr_db: stop must not be below start");
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc[key].is_null()) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_snr(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

std::string ExperimentConfig::digest() const {
  json canon = document;
  canon.erase("workers");
  canon.erase("outputs");
  return sha256_hex(canon.dump());
}

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig cfg;
  cfg.document = doc;
  cfg.base_dir = base_dir;
  cfg.scenario = get_or<std::string>(doc, "scenario", "");
  if (!doc.contains("seed") || !doc["seed"].is_number_integer())
    throw ConfigError("config: integer 'seed' is mandatory");
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.m = get_or(doc, "m", 1);
  cfg.n = get_or(doc, "n", 1);
  cfg.t = get_or(doc, "t", 4);
  cfg.bits = get_or(doc, "bits", 8);
  if (cfg.m < 1 || cfg.n < 1 || cfg.t < cfg.m) throw ConfigError("config: need T >= M >= 1 and N >= 1");
  if (cfg.bits < 1 || cfg.bits > 20) throw ConfigError("config: bits must lie in [1, 20]");

  if (!doc.contains("snr_db") || !doc["snr_db"].is_object())
    throw ConfigError("config: 'snr_db' section {start, stop, step} is mandatory");
  const json& snr = doc["snr_db"];
  cfg.snr.start = get_or(snr, "start", 0.0);
  cfg.snr.stop = get_or(snr, "stop", cfg.snr.start);
  cfg.snr.step = get_or(snr, "step", 1.0);
  if (cfg.snr.points().empty()) throw ConfigError("config: empty SNR grid");

  cfg.estimator = estimator_from_string(get_or<std::string>(doc, "estimator", "zf"));
  cfg.kappa = get_or(doc, "kappa", 1.0);
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0)) throw ConfigError("config: kappa must lie in (0, 1]");
  const auto trials = get_or<std::int64_t>(doc, "trials", 100000);
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  cfg.trials = static_cast<std::uint64_t>(trials);

  if (doc.contains("rate")) {
    const json& r = doc["rate"];
    cfg.rate.max_trials = get_or<std::uint64_t>(r, "max_trials", cfg.rate.max_trials);
    cfg.rate.min_trials = get_or<std::uint64_t>(r, "min_trials", cfg.rate.min_trials);
    cfg.rate.round_trials = get_or<std::uint64_t>(r, "round_trials", cfg.rate.round_trials);
    cfg.rate.stderr_target = get_or(r, "stderr_target", cfg.rate.stderr_target);
    if (cfg.rate.max_trials < 1 || cfg.rate.round_trials < 1)
      throw ConfigError("config: rate trial counts must be >= 1");
  }
  if (doc.contains("frame")) {
    cfg.frame.pilot_slots = get_or(doc["frame"], "pilot_slots", cfg.frame.pilot_slots);
    cfg.frame.data_slots = get_or(doc["frame"], "data_slots", cfg.frame.data_slots);
    if (cfg.frame.pilot_slots < 0 || cfg.frame.data_slots < 0 ||
        cfg.frame.pilot_slots + cfg.frame.data_slots == 0)
      throw ConfigError("config: invalid frame layout");
  }
  if (doc.contains("data")) {
    cfg.qam_order = get_or(doc["data"], "qam_order", cfg.qam_order);
    cfg.betas = get_or(doc["data"], "betas", std::vector<double>{});
  }
  try {
    (void)QamConstellation::square(cfg.qam_order);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: data.qam_order: ") + e.what());
  }
  for (double b : cfg.betas)
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("config: betas must lie in [0, 1]");

  cfg.codebook = get_or(doc, "codebook", json::object());
  if (doc.contains("schemes")) {
    if (!doc["schemes"].is_array()) throw ConfigError("config: 'schemes' must be an array");
    for (const json& s : doc["schemes"]) {
      SchemeSpec spec;
      spec.name = get_or<std::string>(s, "name", "");
      if (spec.name.empty()) throw ConfigError("config: every scheme needs a name");
      spec.rotate = get_or(s, "rotate", false);
      if (s.contains("codebook_file")) {
        spec.file = s["codebook_file"].get<std::string>();
        if (spec.file.is_relative()) spec.file = base_dir / spec.file;
      } else if (s.contains("codebook")) {
        spec.codebook = s["codebook"];
      } else if (get_or<std::string>(s, "type", spec.name) == "training") {
        spec.training = true;
      } else {
        throw ConfigError("config: scheme '" + spec.name + "' needs a codebook, codebook_file or type training");
      }
      cfg.schemes.push_back(std::move(spec));
    }
  }
  if (doc.contains("outputs")) {
    for (const auto& [key, value] : doc["outputs"].items()) {
      std::filesystem::path p = value.get<std::string>();
      cfg.outputs[key] = p.is_relative() ? base_dir / p : p;
    }
  }
  cfg.workers = get_or(doc, "workers", 1u);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str(), nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

ExperimentConfig apply_overrides(const ExperimentConfig& cfg, const ConfigOverrides& o) {
  nlohmann::json doc = cfg.document;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.trials) doc["trials"] = *o.trials;
  if (o.stderr_target) doc["rate"]["stderr_target"] = *o.stderr_target;
  if (o.workers) doc["workers"] = *o.workers;
  return parse_config(doc, cfg.base_dir);
}

// ---------------------------------------------------------------------------

Codebook build_codebook(const nlohmann::json& spec, const ExperimentConfig& cfg) {
  const std::string method = get_or<std::string>(spec, "method", "");
  const Index t = cfg.t, m = cfg.m;
  std::optional<Codebook> cb;
  if (method == "exp-map") {
    ExpMapParams p;
    if (spec.contains("orders")) {
      p.t = t;
      p.m = m;
      p.per_symbol_orders = spec["orders"].get<std::vector<int>>();
      p.alphabet = alphabet_from_string(get_or<std::string>(spec, "alphabet", "qam"));
      if (spec.contains("scale")) {
        p.scale = spec["scale"].get<double>();
      } else {
        const json g = get_or(spec, "scale_grid", json::object());
        const SnrGrid grid{get_or(g, "start", 0.01), get_or(g, "stop", 2.0), get_or(g, "step", 0.01)};
        const std::vector<double> pts = grid.points();
        p.scale = tune_expmap_scale(p, pts);
      }
    } else {
      p = default_expmap_params(t, m, cfg.bits);
      if (spec.contains("scale")) p.scale = spec["scale"].get<double>();
    }
    cb = build_expmap(p);
  } else if (method == "cube-split") {
    if (m != 1) throw UnsupportedShape("cube-split requires M = 1");
    CubeSplitParams p = spec.contains("bits_per_coord")
                            ? CubeSplitParams{t, spec["bits_per_coord"].get<std::vector<int>>()}
                            : cubesplit_params_for_bits(t, cfg.bits);
    cb = build_cubesplit(p);
  } else if (method == "manopt") {
    ManoptOptions opts;
    opts.epsilon_schedule = get_or(spec, "epsilon_schedule", opts.epsilon_schedule);
    opts.optimizer.max_iterations = get_or(spec, "max_iterations", opts.optimizer.max_iterations);
    opts.optimizer.gradient_tolerance = get_or(spec, "gradient_tolerance", opts.optimizer.gradient_tolerance);
    const std::string rule = get_or<std::string>(spec, "rule", "steepest");
    if (rule == "cg")
      opts.optimizer.rule = DescentRule::ConjugateGradient;
    else if (rule != "steepest")
      throw ConfigError("codebook: rule must be 'steepest' or 'cg'");
    const auto size = get_or<std::size_t>(spec, "size", std::size_t{1} << cfg.bits);
    const auto seed = get_or<std::uint64_t>(spec, "seed", cfg.seed);
    cb = build_manopt(size, t, m, seed, opts);
  } else {
    throw ConfigError("codebook: unknown method '" + method + "'");
  }
  if (get_or(spec, "rotate", false)) return optimize_unitary_rotations(*cb);
  return std::move(*cb);
}

nlohmann::json CodebookReport::to_json() const {
  nlohmann::json ub = nlohmann::json::array();
  for (const auto& [snr, v] : union_bound) ub.push_back({{"snr_db", snr}, {"ser", v}});
  return {{"digest", digest}, {"method", method}, {"t", t}, {"m", m}, {"size", size}, {"bits", bits},
          {"mcd", mcd}, {"rate", rate}, {"union_bound_ser", ub}};
}

CodebookReport codebook_report(const Codebook& codebook, int n_rx) {
  CodebookReport r;
  r.digest = codebook.digest();
  r.method = to_string(codebook.method());
  r.t = codebook.t();
  r.m = codebook.m();
  r.size = codebook.size();
  r.bits = codebook.bits();
  r.mcd = min_chordal_distance(codebook);
  r.rate = rate_of(codebook);
  for (double snr : {10.0, 15.0, 20.0})
    r.union_bound.emplace_back(snr, union_bound_ser(codebook, sigma_v2_from_snr_db(snr), n_rx));
  return r;
}

std::string Scheme::label() const { return codebook ? codebook->digest() : "training"; }

std::vector<Scheme> prepare_schemes(const ExperimentConfig& cfg, std::ostream* log) {
  if (cfg.schemes.empty()) throw ConfigError("config: no schemes to sweep");
  std::vector<Scheme> out;
  for (const SchemeSpec& spec : cfg.schemes) {
    Scheme s;
    s.name = spec.name;
    if (spec.training) {
      s.pilot = make_qpsk_pilot(cfg.t, cfg.m, cfg.seed);
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      Codebook cb = spec.file.empty() ? build_codebook(spec.codebook, cfg) : load_codebook(spec.file);
      if (cb.t() != cfg.t || cb.m() != cfg.m)
        throw ConfigError("scheme '" + spec.name + "': codebook shape does not match (T, M)");
      if (spec.rotate) cb = optimize_unitary_rotations(cb);
      if (log != nullptr) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        *log << "scheme " << spec.name << ": " << to_string(cb.method()) << " |X|=" << cb.size()
             << " mcd=" << min_chordal_distance(cb) << " (" << secs << " s)\n";
      }
      s.codebook = std::move(cb);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Nmse: return "nmse";
    case SweepKind::Ser: return "ser";
    case SweepKind::RateG: return "rate-g";
    case SweepKind::RateE: return "rate-e";
    case SweepKind::Total: return "total";
  }
  return "nmse";
}

SweepKind sweep_kind_from_string(const std::string& s) {
  for (SweepKind k : {SweepKind::Nmse, SweepKind::Ser, SweepKind::RateG, SweepKind::RateE, SweepKind::Total})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown sweep kind '" + s + "'");
}

namespace {

std::vector<std::string> columns_for(SweepKind kind) {
  switch (kind) {
    case SweepKind::Nmse: return {"snr_db", "nmse_db", "stderr_db", "trials", "estimator", "codebook_digest"};
    case SweepKind::Ser: return {"snr_db", "ser", "stderr", "union_bound", "trials", "codebook_digest"};
    default: return {"snr_db", "rate_kind", "mean", "stderr", "trials", "codebook", "beta"};
  }
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out += ',';
    out += cells[k];
  }
  return out;
}

class SweepRunner {
 public:
  SweepRunner(const ExperimentConfig& cfg, std::vector<Scheme> schemes, std::ostream* log)
      : cfg_(cfg), schemes_(std::move(schemes)), log_(log) {}

  std::vector<std::string> rows(SweepKind kind, double snr) {
    switch (kind) {
      case SweepKind::Nmse: return nmse_rows(snr);
      case SweepKind::Ser: return ser_rows(snr);
      case SweepKind::RateG: return rate_g_rows(snr);
      case SweepKind::RateE: return rate_e_rows(snr);
      case SweepKind::Total: return total_rows(snr);
    }
    return {};
  }

 private:
  NmseConfig nmse_config() const {
    return {cfg_.n, cfg_.estimator, cfg_.trials, cfg_.seed, ParallelOptions{cfg_.workers}};
  }

  RateOptions rate_options(const char* tag) const {
    RateOptions o;
    o.max_trials = cfg_.rate.max_trials;
    o.min_trials = cfg_.rate.min_trials;
    o.round_trials = cfg_.rate.round_trials;
    o.stderr_target = cfg_.rate.stderr_target;
    o.seed = derive_seed(cfg_.seed, tag);
    o.parallel.workers = cfg_.workers;
    o.parallel.chunk_size = 64;
    return o;
  }

  NmsePoint measure(const Scheme& s, double snr) const {
    return s.codebook ? measure_nmse_point(*s.codebook, snr, nmse_config())
                      : measure_training_nmse_point(s.pilot, snr, nmse_config());
  }

  void note(const std::string& what) const {
    if (log_ != nullptr) *log_ << what << std::endl;
  }

  std::string rate_row(double snr, const char* kind, const RateEstimate& r, const std::string& label,
                       double beta) const {
    return join({format_snr(snr), kind, format_number(r.mean), format_number(r.std_error),
                 std::to_string(r.trials), label, format_number(beta)});
  }

  std::string qam_label() const { return "qam" + std::to_string(cfg_.qam_order); }

  std::vector<std::string> nmse_rows(double snr) {
    std::vector<std::string> out;
    const std::string est = to_string(cfg_.estimator);
    for (const Scheme& s : schemes_) {
      const NmsePoint p = measure(s, snr);
      note("nmse snr=" + format_snr(snr) + " " + s.name + " nmse_db=" + format_number(p.nmse_db));
      out.push_back(join({format_snr(snr), format_number(p.nmse_db), format_number(p.stderr_db),
                          std::to_string(p.trials), est, s.label()}));
    }
    const double bound = nmse_lower_bound(sigma_v2_from_snr_db(snr), cfg_.m, cfg_.t);
    out.push_back(join({format_snr(snr), format_number(10.0 * std::log10(bound)), "0", "0", est, "bound"}));
    return out;
  }

  std::vector<std::string> ser_rows(double snr) {
    std::vector<std::string> out;
    for (const Scheme& s : schemes_) {
      if (!s.codebook) continue;
      const NmsePoint p = measure(s, snr);
      const double ub = union_bound_ser(*s.codebook, p.sigma_v2, cfg_.n);
      note("ser snr=" + format_snr(snr) + " " + s.name + " ser=" + format_number(p.ser()));
      out.push_back(join({format_snr(snr), format_number(p.ser()), format_number(p.ser_stderr()),
                          format_number(ub), std::to_string(p.trials), s.label()}));
    }
    return out;
  }

  std::vector<std::string> rate_g_rows(double snr) {
    std::vector<std::string> out;
    const double s2 = sigma_v2_from_snr_db(snr);
    for (const Scheme& s : schemes_) {
      if (!s.codebook) continue;
      const RateEstimate r = grassmann_rate(*s.codebook, cfg_.n, s2, rate_options("rate-g"));
      note("rate-g snr=" + format_snr(snr) + " " + s.name + " rg=" + format_number(r.mean));
      out.push_back(rate_row(snr, "rg", r, s.label(), 0.0));
    }
    return out;
  }

  /// Gauss-Markov beta matching the scheme's measured estimation error.
  double measured_beta(const Scheme& s, double snr) const {
    return beta_from_sigma(clamp_sigma_e2(measure(s, snr).sigma_e2));
  }

  std::vector<std::string> rate_e_rows(double snr) {
    std::vector<std::string> out;
    const double s2 = sigma_v2_from_snr_db(snr);
    const QamConstellation qam = QamConstellation::square(cfg_.qam_order);
    const RateEstimate pcsi = coherent_rate_pcsi(qam, cfg_.m, cfg_.n, s2, rate_options("rate-e"));
    out.push_back(rate_row(snr, "re_pcsi", pcsi, qam_label(), 0.0));
    if (!cfg_.betas.empty()) {
      for (double beta : cfg_.betas) {
        const RateEstimate r = coherent_rate_csi_error(qam, cfg_.m, cfg_.n, s2, beta, rate_options("rate-e"));
        out.push_back(rate_row(snr, "re_err", r, qam_label(), beta));
      }
      return out;
    }
    for (const Scheme& s : schemes_) {
      const double beta = measured_beta(s, snr);
      const RateEstimate r = coherent_rate_csi_error(qam, cfg_.m, cfg_.n, s2, beta, rate_options("rate-e"));
      note("rate-e snr=" + format_snr(snr) + " " + s.name + " re=" + format_number(r.mean));
      out.push_back(rate_row(snr, "re_err", r, s.label(), beta));
    }
    return out;
  }

  std::vector<std::string> total_rows(double snr) {
    std::vector<std::string> out;
    const double s2 = sigma_v2_from_snr_db(snr);
    const QamConstellation qam = QamConstellation::square(cfg_.qam_order);
    const RateEstimate pcsi = coherent_rate_pcsi(qam, cfg_.m, cfg_.n, s2, rate_options("rate-e"));
    out.push_back(rate_row(snr, "re_pcsi", pcsi, qam_label(), 0.0));
    for (const Scheme& s : schemes_) {
      const double beta = measured_beta(s, snr);
      RateEstimate rg;
      if (s.codebook) rg = grassmann_rate(*s.codebook, cfg_.n, s2, rate_options("rate-g"));
      const RateEstimate re = coherent_rate_csi_error(qam, cfg_.m, cfg_.n, s2, beta, rate_options("rate-e"));
      const RateEstimate total = total_slot_rate(rg, re, cfg_.frame);
      const RateEstimate per_sym = per_symbol(total, cfg_.frame);
      note("total snr=" + format_snr(snr) + " " + s.name + " beta=" + format_number(beta) +
           " rg=" + format_number(rg.mean) + " re=" + format_number(re.mean) +
           " total=" + format_number(total.mean));
      out.push_back(rate_row(snr, "rg", rg, s.label(), beta));
      out.push_back(rate_row(snr, "re_err", re, s.label(), beta));
      out.push_back(rate_row(snr, "total", total, s.label(), beta));
      out.push_back(rate_row(snr, "total_per_sym", per_sym, s.label(), beta));
    }
    return out;
  }

  const ExperimentConfig& cfg_;
  std::vector<Scheme> schemes_;
  std::ostream* log_;
};

/// Exclusive marker next to the output so two sweeps never write the same file.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& out) : path_(out.string() + ".lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr)
      throw Error("output " + out.string() + " is locked by another sweep (remove " + path_.string() +
                  " if stale)");
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::size_t rows_per_point(SweepKind kind, const ExperimentConfig& cfg, const std::vector<Scheme>& schemes) {
  std::size_t with_codebook = 0;
  for (const Scheme& s : schemes) with_codebook += s.codebook ? 1 : 0;
  switch (kind) {
    case SweepKind::Nmse: return schemes.size() + 1;
    case SweepKind::Ser: return with_codebook;
    case SweepKind::RateG: return with_codebook;
    case SweepKind::RateE: return 1 + (cfg.betas.empty() ? schemes.size() : cfg.betas.size());
    case SweepKind::Total: return 1 + 4 * schemes.size();
  }
  return 0;
}

}  // namespace

void run_sweep(const ExperimentConfig& cfg, SweepKind kind, const std::filesystem::path& out,
               std::ostream* log) {
  std::vector<Scheme> schemes = prepare_schemes(cfg, log);
  const std::string digest = cfg.digest();
  const std::vector<double> grid = cfg.snr.points();
  const std::size_t per_point = rows_per_point(kind, cfg, schemes);
  if (per_point == 0) throw ConfigError("sweep " + to_string(kind) + ": no applicable schemes");

  std::vector<std::string> header = {"# dcrs sweep: " + to_string(kind), "# config_digest: " + digest};
  if (!cfg.scenario.empty()) header.push_back("# scenario: " + cfg.scenario);
  for (const Scheme& s : schemes) header.push_back("# scheme " + s.name + " = " + s.label());

  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  const OutputLock lock(out);

  // Resume: keep complete SNR groups of a matching earlier run.
  std::vector<std::string> kept;
  std::size_t next_point = 0;
  if (std::filesystem::exists(out) && std::filesystem::file_size(out) > 0) {
    const CsvTable old = read_csv(out);
    if (old.meta_value("config_digest") != digest)
      throw ConfigError("resume: " + out.string() + " was produced by a different config (digest " +
                        old.meta_value("config_digest") + ")");
    if (old.meta_value("dcrs sweep") != to_string(kind))
      throw ConfigError("resume: " + out.string() + " holds a different sweep kind");
    std::size_t r = 0;
    while (next_point < grid.size() && r + per_point <= old.rows.size()) {
      bool complete = true;
      for (std::size_t k = 0; k < per_point; ++k)
        if (old.rows[r + k].empty() || old.rows[r + k][0] != format_snr(grid[next_point])) complete = false;
      if (!complete) break;
      for (std::size_t k = 0; k < per_point; ++k) kept.push_back(join(old.rows[r + k]));
      r += per_point;
      ++next_point;
    }
    if (log != nullptr && next_point > 0) *log << "resuming after " << next_point << " SNR point(s)\n";
  }

  std::ofstream file(out, std::ios::trunc);
  if (!file) throw Error("cannot write " + out.string());
  for (const auto& h : header) file << h << '\n';
  file << join(columns_for(kind)) << '\n';
  for (const auto& row : kept) file << row << '\n';
  file.flush();

  SweepRunner runner(cfg, std::move(schemes), log);
  for (std::size_t p = next_point; p < grid.size(); ++p) {
    for (const auto& row : runner.rows(kind, grid[p])) file << row << '\n';
    file.flush();
    if (!file) throw Error("write failed for " + out.string());
  }
}

// ---------------------------------------------------------------------------

std::string CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return {};
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw FormatError("csv: no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto colon = body.find(':');
      if (colon == std::string::npos) {
        table.meta.emplace_back(body, "");
      } else {
        const auto value_start = body.find_first_not_of(' ', colon + 1);
        table.meta.emplace_back(body.substr(0, colon),
                                value_start == std::string::npos ? "" : body.substr(value_start));
      }
      continue;
    }
    if (table.columns.empty()) {
      table.columns = split(line);
      continue;
    }
    std::vector<std::string> row = split(line);
    // A row cut short by an interrupted write is dropped.
    if (row.size() != table.columns.size()) break;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::optional<double> find_crossing(const std::vector<double>& snr, const std::vector<double>& a,
                                    const std::vector<double>& b) {
  if (snr.size() != a.size() || snr.size() != b.size())
    throw DimensionMismatch("find_crossing: series lengths differ");
  for (std::size_t k = 0; k + 1 < snr.size(); ++k) {
    const double d0 = a[k] - b[k];
    const double d1 = a[k + 1] - b[k + 1];
    if (d0 == 0.0) return snr[k];
    if ((d0 < 0.0) != (d1 < 0.0) || d1 == 0.0) return snr[k] + (snr[k + 1] - snr[k]) * d0 / (d0 - d1);
  }
  return std::nullopt;
}

}  // namespace dcrs
