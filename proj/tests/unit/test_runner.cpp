#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <couette_ep/runner.hpp>

using namespace couette_ep;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("couette_ep_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

RunConfig cheap_config() {
  RunConfig c;
  c.grid.k_max = 3;
  c.grid.xi_min = -2.0;
  c.grid.xi_max = 2.0;
  c.grid.n_xi = 9;
  c.time.t_max = 12.0;
  c.time.n_outputs = 7;
  return c;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.species == Species::ion);
  CHECK(c.time.t_max == 200.0);
  CHECK(c.time.n_outputs == 101);
  CHECK(c.time.tol == 1e-6);
  CHECK(c.grid.k_max == 8);
  CHECK(c.grid.n_xi == 513);
  CHECK(c.threads == 0);
  CHECK(c.checks == all_check_names());
  CHECK(c.out_dir == "out");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("flat key-value text with comments, blanks and later-wins") {
  RunConfig c;
  apply_config_text(c,
                    "# run shape\n"
                    "run.species = electron\n"
                    "grid.k_max = 4   # trailing comment\n"
                    "\n"
                    "time.t_max = 60\n"
                    "time.t_max = 80\n"
                    "init.profile = random_band\n"
                    "init.hermitian = no\n"
                    "init.band_halfwidth = 2.5\n"
                    "run.checks = upper_growth, lower_growth\n");
  CHECK(c.species == Species::electron);
  CHECK(c.grid.k_max == 4);
  CHECK(c.time.t_max == 80.0);
  CHECK(c.init.profile == "random_band");
  CHECK_FALSE(c.init.hermitian);
  CHECK(c.init.band_halfwidth == 2.5);
  CHECK(c.checks == std::vector<std::string>{"upper_growth", "lower_growth"});
}

TEST_CASE("config parse failures") {
  RunConfig c;
  CHECK_THROWS_AS(apply_override(c, "no equals sign"), ConfigParse);
  CHECK_THROWS_AS(apply_override(c, "= 3"), ConfigParse);
  CHECK_THROWS_AS(apply_override(c, "grid.bogus = 3"), UnknownKey);
  CHECK_THROWS_AS(apply_override(c, "grid.bogus = 3"), ConfigParse);  // UnknownKey is-a
  CHECK_THROWS_AS(apply_override(c, "grid.k_max = four"), ConfigParse);
  CHECK_THROWS_AS(apply_override(c, "time.tol = 1e-6x"), ConfigParse);
  CHECK_THROWS_AS(apply_override(c, "init.hermitian = maybe"), ConfigParse);
  CHECK_THROWS_AS(apply_override(c, "run.species = muon"), ConfigParse);

  try {
    apply_config_text(c, "grid.k_max = 4\ntime.tol = oops\n");
    FAIL("expected ConfigParse");
  } catch (const ConfigParse& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(load_config("/nonexistent/path/config.txt"), ConfigParse);
}

TEST_CASE("config validation rejects out-of-range settings") {
  auto broken = [](auto&& mutate) {
    RunConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigParse);
  };
  broken([](RunConfig& c) { c.time.t_max = 0.0; });
  broken([](RunConfig& c) { c.time.n_outputs = 1; });
  broken([](RunConfig& c) { c.time.tol = 0.02; });
  broken([](RunConfig& c) { c.time.tol = 0.0; });
  broken([](RunConfig& c) { c.time.cap_c = 0.0; });
  broken([](RunConfig& c) { c.threads = -1; });
  broken([](RunConfig& c) { c.out_dir.clear(); });
  broken([](RunConfig& c) { c.checks = {"upper_growth", "bogus_check"}; });
}

TEST_CASE("output times are a closed linspace") {
  RunConfig c;
  c.time.t_max = 10.0;
  c.time.n_outputs = 5;
  const std::vector<double> t = c.output_times();
  REQUIRE(t.size() == 5);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 10.0);
  CHECK(t[2] == 5.0);
}

TEST_CASE("config json echo keeps a stable section order") {
  const nlohmann::ordered_json j = config_json(RunConfig{});
  const std::string dumped = j.dump();
  const auto pos = [&](const char* key) { return dumped.find(key); };
  CHECK(pos("\"run\"") < pos("\"params\""));
  CHECK(pos("\"params\"") < pos("\"grid\""));
  CHECK(pos("\"grid\"") < pos("\"init\""));
  CHECK(pos("\"init\"") < pos("\"time\""));
  CHECK(j["run"]["species"] == "ion");
  CHECK(j["grid"]["n_xi"] == 513);
  CHECK(j["time"]["t_max"] == 200.0);
}

TEST_CASE("thread resolution order") {
  unsetenv("COUETTE_EP_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) == 0);
  setenv("COUETTE_EP_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  CHECK(resolve_threads(2) == 2);  // explicit wins over the environment
  setenv("COUETTE_EP_THREADS", "garbage", 1);
  CHECK(resolve_threads(0) == 0);
  unsetenv("COUETTE_EP_THREADS");
}

TEST_CASE("simulate output is deterministic across reruns and thread counts") {
  TempDir a, b, c;
  RunConfig cfg = cheap_config();
  cfg.init.profile = "random_band";
  cfg.init.band_halfwidth = 2.0;

  cfg.out_dir = a.path.string();
  cfg.threads = 1;
  REQUIRE(cmd_simulate(cfg) == 0);
  cfg.out_dir = b.path.string();
  REQUIRE(cmd_simulate(cfg) == 0);
  cfg.out_dir = c.path.string();
  cfg.threads = 8;
  REQUIRE(cmd_simulate(cfg) == 0);

  const std::string norms_a = slurp(a.path / "norms.csv");
  CHECK(norms_a == slurp(b.path / "norms.csv"));
  CHECK(norms_a == slurp(c.path / "norms.csv"));
  const std::string modes_a = slurp(a.path / "modes.csv");
  CHECK(modes_a == slurp(b.path / "modes.csv"));
  CHECK(modes_a == slurp(c.path / "modes.csv"));
}

TEST_CASE("zero-amplitude data writes all-zero norm columns") {
  TempDir dir;
  RunConfig cfg = cheap_config();
  cfg.init.amplitude = 0.0;
  cfg.out_dir = dir.path.string();
  REQUIRE(cmd_simulate(cfg) == 0);

  const std::vector<std::string> rows = lines_of(slurp(dir.path / "norms.csv"));
  REQUIRE(rows.size() == 1 + 7);
  CHECK(rows[0] == "t,pux,puy,qu,eta,phi,sym_weighted,energy_ratio_min,energy_ratio_max");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string> cells = split_csv(rows[i]);
    REQUIRE(cells.size() == 9);
    for (std::size_t col = 1; col <= 6; ++col) CHECK(std::stod(cells[col]) == 0.0);
    CHECK(std::stod(cells[7]) == 1.0);  // no live modes: ratio extremes default to 1
    CHECK(std::stod(cells[8]) == 1.0);
  }
}

TEST_CASE("meta json echoes the config and run facts") {
  TempDir dir;
  RunConfig cfg = cheap_config();
  cfg.out_dir = dir.path.string();
  REQUIRE(cmd_simulate(cfg) == 0);

  const nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "meta.json"));
  CHECK(j["config"]["grid"]["n_xi"] == 9);
  CHECK(j["config"]["time"]["t_max"] == 12.0);
  CHECK(j["config"]["run"]["species"] == "ion");
  CHECK(j["versions"]["couette_ep"] == "0.1.0");
  CHECK(j["wall_seconds"].get<double>() >= 0.0);
  CHECK(j["max_det_defect"].get<double>() >= 0.0);
  CHECK(j["max_det_defect"].get<double>() < 1e-3);
}

TEST_CASE("verify reports a too-short horizon as a failed check") {
  TempDir dir;
  RunConfig cfg = cheap_config();
  cfg.time.t_max = 5.0;
  cfg.checks = {"upper_growth"};
  cfg.out_dir = dir.path.string();

  std::ostringstream log;
  CHECK(cmd_verify(cfg, &log) == 1);
  CHECK(log.str().find("FAIL upper_growth") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "report.json"));
  CHECK(j["all_pass"] == false);
  REQUIRE(j["reports"].size() == 1);
  CHECK(j["reports"][0]["check"] == "upper_growth");
  CHECK(j["reports"][0]["pass"] == false);
  CHECK(j["reports"][0]["note"].get<std::string>().find("too short") != std::string::npos);
}

TEST_CASE("verify on zero data passes vacuously") {
  TempDir dir;
  RunConfig cfg = cheap_config();
  cfg.init.amplitude = 0.0;
  cfg.checks = {"upper_px_phi", "upper_py", "upper_growth", "lower_growth"};
  cfg.out_dir = dir.path.string();

  std::ostringstream log;
  CHECK(cmd_verify(cfg, &log) == 0);
  CHECK(log.str().find("PASS lower_growth") != std::string::npos);
  CHECK(log.str().find("(degenerate)") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "report.json"));
  CHECK(j["all_pass"] == true);
  REQUIRE(j["reports"].size() == 4);
  for (const auto& rep : j["reports"]) CHECK(rep["pass"] == true);
  CHECK(j["reports"][3]["check"] == "lower_growth");
  CHECK(j["reports"][3]["degenerate"] == true);
}

TEST_CASE("sweep with no values writes the header and validates the axis") {
  TempDir dir;
  RunConfig cfg = cheap_config();
  cfg.checks = {"upper_growth", "lower_growth"};
  cfg.out_dir = dir.path.string();

  CHECK(cmd_sweep(cfg, "init.seed", {}) == 0);
  const std::vector<std::string> rows = lines_of(slurp(dir.path / "sweep.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] ==
        "value,all_pass,upper_growth_margin,upper_growth_slope,upper_growth_observed,"
        "upper_growth_pass,lower_growth_margin,lower_growth_slope,lower_growth_observed,"
        "lower_growth_pass");

  CHECK_THROWS_AS(cmd_sweep(cfg, "grid.bogus", {}), UnknownAxis);
  CHECK_THROWS_AS(cmd_sweep(cfg, "grid.bogus", {"1", "2"}), UnknownAxis);
}

TEST_CASE("seed sweep orders rows numerically and keeps the growth slope stable") {
  TempDir dir;
  RunConfig cfg;
  cfg.grid.k_max = 4;
  cfg.grid.xi_min = -16.0;
  cfg.grid.xi_max = 16.0;
  cfg.grid.n_xi = 129;
  cfg.time.t_max = 60.0;
  cfg.time.n_outputs = 121;
  cfg.init.profile = "random_band";
  cfg.checks = {"upper_growth"};
  cfg.out_dir = dir.path.string();

  CHECK(cmd_sweep(cfg, "init.seed", {"3", "1", "2"}) == 0);

  const std::vector<std::string> rows = lines_of(slurp(dir.path / "sweep.csv"));
  REQUIRE(rows.size() == 4);
  const std::vector<std::string> header = split_csv(rows[0]);
  std::size_t slope_col = 0, pass_col = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "upper_growth_slope") slope_col = i;
    if (header[i] == "upper_growth_pass") pass_col = i;
  }
  REQUIRE(slope_col > 0);
  REQUIRE(pass_col > 0);

  std::vector<double> slopes;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string> cells = split_csv(rows[i]);
    CHECK(cells[0] == std::to_string(i));  // 1, 2, 3 in numeric order
    CHECK(cells[1] == "1");
    CHECK(cells[pass_col] == "1");
    slopes.push_back(std::stod(cells[slope_col]));
  }
  for (double s : slopes)
    for (double s2 : slopes) CHECK(std::abs(s - s2) <= 0.15);
}
