#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "verify.hpp"

namespace couette_ep {

struct IoFailure : std::runtime_error {
  explicit IoFailure(const std::string& path) : std::runtime_error("cannot write " + path) {}
};

struct UnknownAxis : std::runtime_error {
  explicit UnknownAxis(const std::string& axis)
      : std::runtime_error("unknown sweep axis '" + axis + "'") {}
};

namespace detail {

/// Full-precision scientific notation (17 significant digits), locale-free.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace detail

/// --threads wins when positive; 0 falls back to COUETTE_EP_THREADS, then to
/// hardware concurrency (signalled downstream by 0).
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COUETTE_EP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

struct SimulateResult {
  RunConfig config;
  InitialSpec spec;
  TrajectorySet set;
  NormSeries series;
  double wall_seconds = 0.0;
};

inline SimulateResult run_simulation(const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SimulateResult r;
  r.config = cfg;
  r.spec = make_initial(cfg.grid, cfg.init);
  EvolveOptions opt;
  opt.integ.tol = cfg.time.tol;
  opt.integ.cap_c = cfg.time.cap_c;
  opt.threads = resolve_threads(cfg.threads);
  r.set = evolve_grid(r.spec, cfg.params, cfg.species, cfg.output_times(), opt);
  r.series = build_norm_series(r.set, r.spec);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline void write_norms_csv(const std::string& path, const NormSeries& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  out << "t,pux,puy,qu,eta,phi,sym_weighted,energy_ratio_min,energy_ratio_max\n";
  for (std::size_t i = 0; i < s.times.size(); ++i)
    out << detail::fmt_full(s.times[i]) << ',' << detail::fmt_full(s.pux[i]) << ','
        << detail::fmt_full(s.puy[i]) << ',' << detail::fmt_full(s.qu[i]) << ','
        << detail::fmt_full(s.eta[i]) << ',' << detail::fmt_full(s.phi[i]) << ','
        << detail::fmt_full(s.sym_weighted[i]) << ',' << detail::fmt_full(s.energy_ratio_min[i])
        << ',' << detail::fmt_full(s.energy_ratio_max[i]) << '\n';
  out.flush();
  if (!out) throw IoFailure(path);
}

inline void write_modes_csv(const std::string& path, const TrajectorySet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  out << "k,xi,t,state_abs,energy\n";
  for (int ik = 0; ik < set.grid.n_k(); ++ik)
    for (int j = 0; j < set.grid.n_xi; ++j) {
      const std::size_t row = set.grid.idx(ik, j);
      for (std::size_t it = 0; it < set.nt(); ++it)
        out << set.grid.k_at(ik) << ',' << detail::fmt_full(set.grid.xi_at(j)) << ','
            << detail::fmt_full(set.times[it]) << ','
            << detail::fmt_full(std::sqrt(abs2(set.states[set.idx(row, it)]))) << ','
            << detail::fmt_full(set.energies[set.idx(row, it)]) << '\n';
    }
  out.flush();
  if (!out) throw IoFailure(path);
}

inline nlohmann::ordered_json versions_json() {
  return {{"couette_ep", "0.1.0"},
          {"compiler", __VERSION__},
          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

inline void write_meta_json(const std::string& path, const SimulateResult& r) {
  nlohmann::ordered_json j;
  j["config"] = config_json(r.config);
  j["versions"] = versions_json();
  j["wall_seconds"] = r.wall_seconds;
  j["max_det_defect"] = r.set.max_det_defect();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoFailure(path);
}

/// 100 seeded modes with |k| <= 8 (nonzero) and |xi| <= 16 for the energy
/// lemma sample.
inline std::vector<ModeCoord> lemma_mode_sample(std::uint64_t seed, std::size_t count = 100) {
  std::mt19937_64 eng(seed);
  std::vector<ModeCoord> modes;
  modes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int k_abs = 1 + static_cast<int>(eng() % 8);
    const int sign = (eng() & 1) ? 1 : -1;
    const double xi = 16.0 * (2.0 * detail::unit_double(eng) - 1.0);
    modes.push_back({sign * k_abs, xi});
  }
  return modes;
}

/// Run the configured check list against a finished simulation. A check that
/// cannot run (series too short) is reported failed with the reason in its
/// note instead of aborting the suite.
inline std::vector<VerificationReport> run_checks(const SimulateResult& r) {
  const RunConfig& cfg = r.config;
  std::vector<VerificationReport> reports;
  reports.reserve(cfg.checks.size());
  for (const std::string& name : cfg.checks) {
    try {
      if (name == "upper_px_phi")
        reports.push_back(check_upper_px_phi(r.series, r.spec, cfg.params));
      else if (name == "upper_py") reports.push_back(check_upper_py(r.series, r.spec, cfg.params));
      else if (name == "upper_growth")
        reports.push_back(check_upper_growth(r.series, r.spec, cfg.params));
      else if (name == "lower_growth")
        reports.push_back(check_lower_growth(r.series, r.spec, cfg.params));
      else if (name == "lemma_energy") {
        LemmaEnergyOptions lo;
        lo.seed = cfg.init.seed;
        reports.push_back(
            check_lemma_energy(lemma_mode_sample(cfg.init.seed), cfg.params, cfg.species, lo));
      } else throw ConfigParse("unknown check name: " + name);
    } catch (const SeriesTooShort& e) {
      VerificationReport rep;
      rep.check = name;
      rep.species = cfg.species;
      rep.margin = -1.0;
      rep.pass = false;
      rep.t_max = e.t_max;
      rep.note = e.what();
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

inline nlohmann::ordered_json report_json(const VerificationReport& rep,
                                          const FrequencyGrid& grid) {
  nlohmann::ordered_json j;
  j["check"] = rep.check;
  j["species"] = species_name(rep.species);
  j["bound"] = rep.bound;
  j["observed"] = rep.observed;
  j["margin"] = rep.margin;
  j["pass"] = rep.pass;
  j["degenerate"] = rep.degenerate;
  j["slope"] = rep.slope;  // NaN serializes as null
  j["slope_expected"] = rep.slope_expected;
  j["slope_tol"] = rep.slope_tol;
  j["window"] = {rep.fit_lo, rep.fit_hi};
  j["t_max"] = rep.t_max;
  j["note"] = rep.note;
  j["grid"] = {{"k_max", grid.k_max},
               {"xi_min", grid.xi_min},
               {"xi_max", grid.xi_max},
               {"n_xi", grid.n_xi}};
  return j;
}

inline std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoFailure(cfg.out_dir);
  return dir;
}

inline int cmd_simulate(const RunConfig& cfg) {
  const SimulateResult r = run_simulation(cfg);
  const auto dir = ensure_out_dir(cfg);
  write_norms_csv((dir / "norms.csv").string(), r.series);
  write_modes_csv((dir / "modes.csv").string(), r.set);
  write_meta_json((dir / "meta.json").string(), r);
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream* log = nullptr) {
  const SimulateResult r = run_simulation(cfg);
  const std::vector<VerificationReport> reports = run_checks(r);
  bool all_pass = true;
  for (const VerificationReport& rep : reports) {
    all_pass = all_pass && rep.pass;
    if (log)
      *log << (rep.pass ? "PASS " : "FAIL ") << rep.check << " margin=" << rep.margin
           << " observed=" << rep.observed << (rep.degenerate ? " (degenerate)" : "") << '\n';
  }

  nlohmann::ordered_json j;
  j["config"] = config_json(cfg);
  j["versions"] = versions_json();
  j["all_pass"] = all_pass;
  j["reports"] = nlohmann::ordered_json::array();
  for (const VerificationReport& rep : reports) j["reports"].push_back(report_json(rep, cfg.grid));

  const auto dir = ensure_out_dir(cfg);
  const std::string path = (dir / "report.json").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoFailure(path);
  return all_pass ? 0 : 1;
}

inline int cmd_sweep(const RunConfig& cfg, const std::string& axis,
                     const std::vector<std::string>& values) {
  cfg.validate();

  {
    // Validate the axis key up front (even with no values) on a scratch copy;
    // a value parse failure here just proves the key exists.
    RunConfig probe = cfg;
    try {
      apply_override(probe, axis + "=0");
    } catch (const UnknownKey&) {
      throw UnknownAxis(axis);
    } catch (const ConfigParse&) {
    }
  }

  // Rows ordered by value: numerically when every value parses, else lexically.
  std::vector<std::string> ordered = values;
  std::vector<double> numeric(values.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < values.size() && all_numeric; ++i) {
    try {
      numeric[i] = detail::parse_double(axis, values[i]);
    } catch (const ConfigParse&) {
      all_numeric = false;
    }
  }
  if (all_numeric) {
    std::vector<std::size_t> perm(values.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return numeric[a] < numeric[b]; });
    for (std::size_t i = 0; i < perm.size(); ++i) ordered[i] = values[perm[i]];
  } else {
    std::sort(ordered.begin(), ordered.end());
  }

  const auto dir = ensure_out_dir(cfg);
  const std::string path = (dir / "sweep.csv").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  out << "value,all_pass";
  for (const std::string& name : cfg.checks)
    out << ',' << name << "_margin," << name << "_slope," << name << "_observed," << name
        << "_pass";
  out << '\n';

  bool every_row_passed = true;
  for (const std::string& value : ordered) {
    RunConfig row_cfg = cfg;
    try {
      apply_override(row_cfg, axis + "=" + value);
    } catch (const UnknownKey&) {
      throw UnknownAxis(axis);
    }
    const SimulateResult r = run_simulation(row_cfg);
    const std::vector<VerificationReport> reports = run_checks(r);
    bool all_pass = true;
    for (const VerificationReport& rep : reports) all_pass = all_pass && rep.pass;
    every_row_passed = every_row_passed && all_pass;
    out << value << ',' << (all_pass ? 1 : 0);
    for (const VerificationReport& rep : reports)
      out << ',' << detail::fmt_full(rep.margin) << ',' << detail::fmt_full(rep.slope) << ','
          << detail::fmt_full(rep.observed) << ',' << (rep.pass ? 1 : 0);
    out << '\n';
  }
  out.flush();
  if (!out) throw IoFailure(path);
  return every_row_passed ? 0 : 1;
}

}  // namespace couette_ep
