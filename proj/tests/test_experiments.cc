#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "osmp/error.h"
#include "osmp/experiments.h"
#include "test_util.h"

using namespace osmp;
namespace fs = std::filesystem;

namespace {

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

int columns(const std::string& line) {
  int n = 1;
  for (char c : line) n += c == ',';
  return n;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "osmp_test_experiments";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(OSMP_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

sim::Scenario quick() {
  sim::Scenario sc;
  sc.duration_s = 1.0;
  sc.warmup_s = 0.2;
  return sc;
}

}  // namespace

TEST_CASE("analyze CSV") {
  const auto csv = analyze_csv(analyze_loads(default_config(), default_loads()));
  CHECK(first_line(csv) == "load,eta_analytical,p_avg_w,n_states,residual");
  CHECK(count_lines(csv) == 10);

  const auto zero = analyze_loads(default_config(), {0.0});
  CHECK(zero[0].analysis.eta == doctest::Approx(1 - 0.75 / 3.984).epsilon(1e-12));
  CHECK(analyze_csv(analyze_loads(default_config(), {0.3, 0.6}, ActivePower::kMda, 1)) ==
        analyze_csv(analyze_loads(default_config(), {0.3, 0.6}, ActivePower::kMda, 4)));
}

TEST_CASE("simulate CSV") {
  const auto cfg = default_config();
  const auto pts = simulate_loads(cfg, quick(), default_loads(), default_seeds());
  const auto csv = simulate_csv(cfg, quick(), pts);
  CHECK(count_lines(csv) == 1 + 45 + 9);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const int ncol = columns(line);
  CHECK(ncol == 16);
  while (std::getline(in, line)) CHECK(columns(line) == ncol);

  CHECK(pts[0].mean(&sim::MetricsReport::eta) > pts[8].mean(&sim::MetricsReport::eta));
  CHECK(pts[0].eta_std() >= 0.0);
  CHECK(simulate_csv(cfg, quick(), simulate_loads(cfg, quick(), {0.4}, {1, 2}, 1)) ==
        simulate_csv(cfg, quick(), simulate_loads(cfg, quick(), {0.4}, {1, 2}, 3)));
}

TEST_CASE("validate") {
  const auto cfg = default_config();
  auto pts = validate_loads(cfg, quick(), {0.3}, {1}, 0.0);
  CHECK_FALSE(pts[0].pass);
  pts = validate_loads(cfg, quick(), {0.3}, {1}, 1.0);
  CHECK(pts[0].pass);
  CHECK(pts[0].gap == doctest::Approx(std::abs(pts[0].eta_sim - pts[0].eta_dtmc)));
  CHECK(first_line(validate_csv(pts)) == "load,eta_dtmc,eta_sim,abs_gap,tolerance,pass");
}

TEST_CASE("sweep spec errors") {
  CHECK_THROWS_WITH_AS(parse_sweep_spec("{"), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(parse_sweep_spec(R"({"values": []})"), doctest::Contains("Usage"), Error);
  CHECK_THROWS_WITH_AS(parse_sweep_spec(R"({"values": [0.5, 0.1]})"), doctest::Contains("Usage"), Error);
  CHECK_THROWS_WITH_AS(parse_sweep_spec(R"({"axis": "colour", "values": [1]})"), doctest::Contains("Usage"),
                       Error);
  CHECK_THROWS_AS(parse_sweep_spec(R"({"values": [1], "scenarios": [{"name": "a", "evaluator": "x"}]})"),
                  Error);
  const auto s = parse_sweep_spec(R"({"axis": "n_th", "values": [20, 40], "scenarios": [{"name": "a"}]})");
  CHECK(s.axis == "n_th");
  CHECK(s.scenarios.size() == 1);
}

TEST_CASE("sweep outputs and canned studies") {
  const auto spec = parse_sweep_spec(
      R"({"values": [0.1, 0.5], "scenarios": [{"name": "base"}, {"name": "n32", "overrides": {"n_onus": 32}}]})");
  const auto out = run_sweep(spec, default_config());
  REQUIRE(out.size() == 4);
  CHECK(out[0].file == "base.csv");
  CHECK(out[1].file == "n32.csv");
  CHECK(out[2].file == "canned_wake_times.csv");
  CHECK(out[3].file == "canned_sleep_powers.csv");
  CHECK(first_line(out[2].csv) == "load,eta_base,eta_t_sw_ds,eta_t_sw_fs,eta_t_sw_dz");
  CHECK(first_line(out[3].csv) == "load,eta_base,eta_p_ds,eta_p_fs,eta_p_dz");
  CHECK(count_lines(out[2].csv) == 3);  // over the swept loads
  CHECK(out[0].csv != out[1].csv);

  auto no_canned = spec;
  no_canned.canned_studies = false;
  CHECK(run_sweep(no_canned, default_config()).size() == 2);

  const auto gp = gnuplot_script("base.csv", out[0].csv, "eta");
  CHECK(gp.find("base.csv") != std::string::npos);
}

TEST_CASE("CLI exit codes") {
  const auto cfg = scratch("ok.cfg");
  write(cfg, osmp::testing::default_document());
  CHECK(cli("analyze --config " + cfg.string() + " --loads 0.5") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("analyze --loads x") == 2);
  CHECK(cli("simulate --predictor psychic") == 2);

  const auto bad = scratch("bad.cfg");
  write(bad, osmp::testing::with_line(osmp::testing::default_document(), "power.on_w", "lots"));
  CHECK(cli("analyze --config " + bad.string()) == 2);
  const auto missing = scratch("missing.cfg");
  write(missing, osmp::testing::with_line(osmp::testing::default_document(), "power.ds_w", ""));
  CHECK(cli("analyze --config " + missing.string()) == 2);

  const auto out = scratch("v.csv");
  CHECK(cli("validate --loads 0.3 --seeds 1 --duration 1 --tolerance 0 --out " + out.string()) == 1);
  CHECK(cli("validate --loads 0.3 --seeds 1 --duration 1 --tolerance 1 --out " + out.string()) == 0);
  CHECK(first_line(slurp(out)) == "load,eta_dtmc,eta_sim,abs_gap,tolerance,pass");

  const auto spec = scratch("spec.json");
  write(spec, R"({"values": [0.2], "canned_studies": false, "plots": true, "scenarios": [{"name": "s"}]})");
  const auto dir = scratch("sweep_out");
  CHECK(cli("sweep --spec " + spec.string() + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "s.csv"));
  CHECK(fs::exists(dir / "s.gp"));
  write(spec, R"({"values": []})");
  CHECK(cli("sweep --spec " + spec.string() + " --out " + dir.string()) == 2);
}

TEST_CASE("analyze dumps the transition matrix") {
  const auto prefix = scratch("m").string();
  REQUIRE(cli("analyze --loads 0.5 --dump-matrix " + prefix) == 0);
  const auto probs = slurp(prefix + "_probs.csv");
  const auto states = slurp(prefix + "_states.csv");
  CHECK(first_line(probs) == "sp,sc,b,sp2,sc2,b2,p");
  CHECK(count_lines(states) == 342);
}
