#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "grid.hpp"
#include "params.hpp"

namespace couette_ep {

struct ConfigParse : std::runtime_error {
  explicit ConfigParse(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// Key not in the schema (as opposed to a malformed value). Sweeps rely on
/// the distinction to map it onto UnknownAxis.
struct UnknownKey : ConfigParse {
  explicit UnknownKey(const std::string& key) : ConfigParse("unknown key: " + key) {}
};

struct TimeConfig {
  double t_max = 200.0;
  int n_outputs = 101;
  double tol = 1e-6;
  double cap_c = 0.1;
};

inline const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names{"upper_px_phi", "upper_py", "upper_growth",
                                              "lower_growth", "lemma_energy"};
  return names;
}

/// Full description of one run. Everything an output file depends on lives
/// here, so (config, seed) determines every byte emitted.
struct RunConfig {
  Species species = Species::ion;
  PlasmaParams params;
  FrequencyGrid grid;
  ProfileOptions init;
  TimeConfig time;
  int threads = 0;  // 0 = auto (env COUETTE_EP_THREADS, then hardware)
  std::vector<std::string> checks = all_check_names();
  std::string out_dir = "out";

  std::vector<double> output_times() const {
    std::vector<double> t(static_cast<std::size_t>(time.n_outputs));
    for (int i = 0; i < time.n_outputs; ++i)
      t[static_cast<std::size_t>(i)] = time.t_max * i / (time.n_outputs - 1);
    return t;
  }

  void validate() const {
    params.validate();
    grid.validate();
    if (!(time.t_max > 0.0)) throw ConfigParse("time.t_max must be positive");
    if (time.n_outputs < 2) throw ConfigParse("time.n_outputs must be at least 2");
    if (!(time.tol > 0.0 && time.tol <= 1e-2))
      throw ConfigParse("time.tol must lie in (0, 1e-2]");
    if (!(time.cap_c > 0.0)) throw ConfigParse("time.cap_c must be positive");
    if (threads < 0) throw ConfigParse("run.threads must be >= 0");
    if (out_dir.empty()) throw ConfigParse("run.out_dir must be nonempty");
    for (const std::string& c : checks) {
      bool known = false;
      for (const std::string& n : all_check_names()) known = known || n == c;
      if (!known) throw ConfigParse("unknown check name: " + c);
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigParse("bad numeric value for " + key + ": '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigParse("bad integer value for " + key + ": '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigParse("bad boolean value for " + key + ": '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "run.species") {
    try {
      c.species = species_from_name(value);
    } catch (const std::invalid_argument&) {
      throw ConfigParse("run.species must be 'ion' or 'electron', got '" + value + "'");
    }
  } else if (key == "run.out_dir") c.out_dir = value;
  else if (key == "run.threads") c.threads = static_cast<int>(parse_int(key, value));
  else if (key == "run.checks") c.checks = split_list(value);
  else if (key == "params.T_plus") c.params.T_plus = parse_double(key, value);
  else if (key == "params.T_minus") c.params.T_minus = parse_double(key, value);
  else if (key == "params.m_plus") c.params.m_plus = parse_double(key, value);
  else if (key == "params.m_minus") c.params.m_minus = parse_double(key, value);
  else if (key == "params.e") c.params.e = parse_double(key, value);
  else if (key == "grid.k_max") c.grid.k_max = static_cast<int>(parse_int(key, value));
  else if (key == "grid.xi_min") c.grid.xi_min = parse_double(key, value);
  else if (key == "grid.xi_max") c.grid.xi_max = parse_double(key, value);
  else if (key == "grid.n_xi") c.grid.n_xi = static_cast<int>(parse_int(key, value));
  else if (key == "init.profile") c.init.profile = value;
  else if (key == "init.amplitude") c.init.amplitude = parse_double(key, value);
  else if (key == "init.width") c.init.width = parse_double(key, value);
  else if (key == "init.xi0") c.init.xi0 = parse_double(key, value);
  else if (key == "init.seed") c.init.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "init.mode_k") c.init.mode_k = static_cast<int>(parse_int(key, value));
  else if (key == "init.mode_xi") c.init.mode_xi = parse_double(key, value);
  else if (key == "init.field") c.init.field = value;
  else if (key == "init.band_halfwidth") c.init.band_halfwidth = parse_double(key, value);
  else if (key == "init.hermitian") c.init.hermitian = parse_bool(key, value);
  else if (key == "time.t_max") c.time.t_max = parse_double(key, value);
  else if (key == "time.n_outputs") c.time.n_outputs = static_cast<int>(parse_int(key, value));
  else if (key == "time.tol") c.time.tol = parse_double(key, value);
  else if (key == "time.cap_c") c.time.cap_c = parse_double(key, value);
  else throw UnknownKey(key);
}

}  // namespace detail

/// Apply one "section.key = value" assignment (the --set grammar).
inline void apply_override(RunConfig& c, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigParse("override must look like section.key=value, got '" + assignment + "'");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  if (key.empty()) throw ConfigParse("empty key in override '" + assignment + "'");
  detail::set_key(c, key, value);
}

/// Parse flat key-value text: one "section.key = value" per line, '#' starts a
/// comment, blank lines ignored. Later lines win.
inline void apply_config_text(RunConfig& c, std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    try {
      apply_override(c, stripped);
    } catch (const ConfigParse& e) {
      throw ConfigParse("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParse("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig c;
  apply_config_text(c, buf.str());
  return c;
}

/// Stable-key-order JSON echo of a config (for meta.json and reports).
inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["run"] = {{"species", species_name(c.species)},
              {"out_dir", c.out_dir},
              {"threads", c.threads},
              {"checks", c.checks}};
  j["params"] = {{"T_plus", c.params.T_plus},
                 {"T_minus", c.params.T_minus},
                 {"m_plus", c.params.m_plus},
                 {"m_minus", c.params.m_minus},
                 {"e", c.params.e}};
  j["grid"] = {{"k_max", c.grid.k_max},
               {"xi_min", c.grid.xi_min},
               {"xi_max", c.grid.xi_max},
               {"n_xi", c.grid.n_xi}};
  j["init"] = {{"profile", c.init.profile},
               {"amplitude", c.init.amplitude},
               {"width", c.init.width},
               {"xi0", c.init.xi0},
               {"seed", c.init.seed},
               {"mode_k", c.init.mode_k},
               {"mode_xi", c.init.mode_xi},
               {"field", c.init.field},
               {"band_halfwidth", c.init.band_halfwidth},
               {"hermitian", c.init.hermitian}};
  j["time"] = {{"t_max", c.time.t_max},
               {"n_outputs", c.time.n_outputs},
               {"tol", c.time.tol},
               {"cap_c", c.time.cap_c}};
  return j;
}

}  // namespace couette_ep
