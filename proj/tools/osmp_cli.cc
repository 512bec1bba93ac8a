// osmp: analysis, simulation, validation and sweeps for the OSMP-EO ONU sleep protocol.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "osmp/config.h"
#include "osmp/dtmc.h"
#include "osmp/error.h"
#include "osmp/experiments.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string spec;
  std::string dump_matrix;
  std::vector<std::uint64_t> seeds = osmp::default_seeds();
  std::vector<double> loads = osmp::default_loads();
  double duration = 50.0;
  std::string predictor = "oracle";
  std::string traffic = "poisson";
  double hurst = 0.8;
  bool baseline_no_mda = false;
  double tolerance = 0.03;
  unsigned workers = 0;
};

osmp::NetworkConfig read_config(const Options& o) {
  return o.config.empty() ? osmp::default_config() : osmp::load_config_file(o.config);
}

osmp::sim::Scenario scenario(const Options& o) {
  osmp::sim::Scenario sc;
  sc.mda = !o.baseline_no_mda;
  sc.duration_s = o.duration;
  sc.warmup_s = std::min(sc.warmup_s, o.duration / 5);
  if (o.predictor == "oracle") sc.predictor = osmp::sim::PredictorKind::kOracle;
  else if (o.predictor == "mean") sc.predictor = osmp::sim::PredictorKind::kMean;
  else throw osmp::Error(osmp::Errc::kUsage, "--predictor must be oracle or mean");
  if (o.traffic == "poisson") sc.traffic = osmp::sim::TrafficKind::kPoisson;
  else if (o.traffic == "selfsimilar") sc.traffic = osmp::sim::TrafficKind::kSelfSimilar;
  else throw osmp::Error(osmp::Errc::kUsage, "--traffic must be poisson or selfsimilar");
  sc.shape.hurst = o.hurst;
  if (o.seeds.empty() || o.loads.empty()) throw osmp::Error(osmp::Errc::kUsage, "empty --seeds or --loads");
  return sc;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw osmp::Error(osmp::Errc::kUsage, "cannot write '" + path + "'");
  f << text;
}

int cmd_analyze(const Options& o) {
  const auto cfg = read_config(o);
  const auto ap = o.baseline_no_mda ? osmp::ActivePower::kAlwaysOn : osmp::ActivePower::kMda;
  emit(o.out, osmp::analyze_csv(osmp::analyze_loads(cfg, o.loads, ap, o.workers)));
  if (!o.dump_matrix.empty()) {
    const auto m = osmp::build_matrix(osmp::with_load(cfg, o.loads.front()), ap);
    std::ofstream probs(o.dump_matrix + "_probs.csv"), side(o.dump_matrix + "_states.csv");
    osmp::write_matrix_csv(m, probs, side);
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto cfg = read_config(o);
  const auto sc = scenario(o);
  emit(o.out, osmp::simulate_csv(cfg, sc, osmp::simulate_loads(cfg, sc, o.loads, o.seeds, o.workers)));
  return 0;
}

int cmd_validate(const Options& o) {
  const auto cfg = read_config(o);
  const auto sc = scenario(o);
  const auto pts = osmp::validate_loads(cfg, sc, o.loads, o.seeds, o.tolerance, o.workers);
  emit(o.out, osmp::validate_csv(pts));
  int failed = 0;
  for (const auto& p : pts) failed += p.pass ? 0 : 1;
  if (failed) std::fprintf(stderr, "validate: %d of %zu points outside tolerance %g\n", failed, pts.size(), o.tolerance);
  return failed ? 1 : 0;
}

int cmd_sweep(const Options& o) {
  if (o.spec.empty()) throw osmp::Error(osmp::Errc::kUsage, "sweep needs --spec");
  std::ifstream in(o.spec);
  if (!in) throw osmp::Error(osmp::Errc::kUsage, "cannot read '" + o.spec + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto spec = osmp::parse_sweep_spec(ss.str());
  const auto cfg = read_config(o);
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  for (const auto& f : osmp::run_sweep(spec, cfg, o.workers)) {
    emit((dir / f.file).string(), f.csv);
    if (spec.plots) {
      const auto gp = f.file.substr(0, f.file.rfind('.')) + ".gp";
      emit((dir / gp).string(), osmp::gnuplot_script(f.file, f.csv, "energy efficiency"));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OSMP-EO energy-efficiency analysis and EPON simulation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "network config file (defaults built in)")->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "output CSV path (stdout if omitted)");
    c->add_option("--loads", o.loads, "comma-separated loads")->delimiter(',');
    c->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  };
  auto sim_flags = [&](CLI::App* c) {
    c->add_option("--seeds", o.seeds, "comma-separated seeds")->delimiter(',');
    c->add_option("--duration", o.duration, "simulated seconds per run")->check(CLI::PositiveNumber);
    c->add_option("--predictor", o.predictor, "oracle | mean")->check(CLI::IsMember({"oracle", "mean"}));
    c->add_option("--traffic", o.traffic, "poisson | selfsimilar")->check(CLI::IsMember({"poisson", "selfsimilar"}));
    c->add_option("--hurst", o.hurst, "Hurst parameter for selfsimilar traffic")->check(CLI::Range(0.5, 1.0));
    c->add_flag("--baseline-no-mda", o.baseline_no_mda, "keep the transceiver on through active periods");
  };

  auto* analyze = app.add_subcommand("analyze", "steady-state efficiency from the Markov chain");
  common(analyze);
  analyze->add_flag("--baseline-no-mda", o.baseline_no_mda, "analyze without doze in active periods");
  analyze->add_option("--dump-matrix", o.dump_matrix, "write PREFIX_probs.csv and PREFIX_states.csv for the first load");

  auto* simulate = app.add_subcommand("simulate", "discrete-event EPON simulation");
  common(simulate);
  sim_flags(simulate);

  auto* validate = app.add_subcommand("validate", "compare analysis and simulation per load");
  common(validate);
  sim_flags(validate);
  validate->add_option("--tolerance", o.tolerance, "absolute efficiency tolerance")->check(CLI::NonNegativeNumber);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep from a JSON spec");
  sweep->add_option("--spec", o.spec, "sweep spec (JSON)")->required();
  sweep->add_option("--config", o.config, "network config file (defaults built in)")->check(CLI::ExistingFile);
  sweep->add_option("--out", o.out, "output directory");
  sweep->add_option("--workers", o.workers, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*simulate) return cmd_simulate(o);
    if (*validate) return cmd_validate(o);
    return cmd_sweep(o);
  } catch (const osmp::Error& e) {
    std::fprintf(stderr, "osmp: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "osmp: %s\n", e.what());
    return 2;
  }
}
