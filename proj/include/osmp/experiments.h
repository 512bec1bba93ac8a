#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osmp/config.h"
#include "osmp/dtmc.h"
#include "osmp/sim/simulator.h"

namespace osmp {

std::vector<double> default_loads();           // 0.1 .. 0.9
std::vector<std::uint64_t> default_seeds();    // 1 .. 5

std::string fmt_num(double v);  // "%.10g"

struct LoadPoint {
  double load = 0;
  Analysis analysis;
};

std::vector<LoadPoint> analyze_loads(const NetworkConfig& cfg, const std::vector<double>& loads,
                                     ActivePower ap = ActivePower::kMda, unsigned workers = 0);
std::string analyze_csv(const std::vector<LoadPoint>& points);

struct SimPoint {
  double load = 0;
  std::vector<sim::MetricsReport> runs;  // one per seed, in seed order
  double mean(double sim::MetricsReport::*field) const;
  double eta_std() const;  // sample standard deviation over seeds
};

std::vector<SimPoint> simulate_loads(const NetworkConfig& cfg, const sim::Scenario& base,
                                     const std::vector<double>& loads,
                                     const std::vector<std::uint64_t>& seeds, unsigned workers = 0);
std::string simulate_csv(const NetworkConfig& cfg, const sim::Scenario& base,
                         const std::vector<SimPoint>& points);

struct ValidatePoint {
  double load = 0;
  double eta_dtmc = 0;
  double eta_sim = 0;
  double gap = 0;
  double tolerance = 0;
  bool pass = false;
};

std::vector<ValidatePoint> validate_loads(const NetworkConfig& cfg, const sim::Scenario& base,
                                          const std::vector<double>& loads,
                                          const std::vector<std::uint64_t>& seeds, double tolerance,
                                          unsigned workers = 0);
std::string validate_csv(const std::vector<ValidatePoint>& points);

struct SweepScenario {
  std::string name;
  bool simulate = false;  // evaluator: analysis (default) or simulation
  std::vector<std::pair<std::string, double>> overrides;
  std::vector<std::pair<std::string, double>> scales;
  sim::Scenario sim;
};

struct SweepSpec {
  std::string axis = "load";
  std::vector<double> values;
  std::vector<SweepScenario> scenarios;
  std::vector<std::uint64_t> seeds = default_seeds();
  double duration_s = 50.0;
  double base_load = 0.5;  // applied when the axis is not the load
  bool canned_studies = true;
  bool plots = false;
};

SweepSpec parse_sweep_spec(const std::string& json_text);

struct SweepOutput {
  std::string file;
  std::string csv;
};

// One CSV per scenario plus the canned -25% studies (wake times and sleep
// powers, one parameter at a time, analytic over the load grid).
std::vector<SweepOutput> run_sweep(const SweepSpec& spec, const NetworkConfig& cfg, unsigned workers = 0);

// gnuplot script drawing every numeric column of csv against the first.
std::string gnuplot_script(const std::string& csv_file, const std::string& csv, const std::string& ylabel);

}  // namespace osmp
