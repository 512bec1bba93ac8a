// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N[,N...]]
//
// Exit status is 0 when the set of failing criteria equals the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "osmp/dtmc.h"
#include "osmp/experiments.h"
#include "osmp/mc_oracle.h"
#include "osmp/sim/simulator.h"
#include "test_util.h"

using namespace osmp;
namespace fs = std::filesystem;

namespace {

constexpr double kL1Row = 5e-3;
constexpr long kRowTrials = 1000000;
constexpr double kRowBudget = 120.0;
constexpr double kRowSumTol = 1e-9;
constexpr double kResidualTol = 1e-10;
constexpr long kWalkSteps = 10000000;
constexpr double kL1Walk = 1e-2;
constexpr double kSimTol = 0.03;
constexpr double kGridBudget = 600.0;
constexpr double kMdaGainFloor = 0.20;
constexpr double kShiftPoints = 0.05;
constexpr double kInsignificant = 0.01;
constexpr double kTiling = 1e-12;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [fail]");
}

std::string num(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

const double kSmallLoads[] = {0.1, 0.5, 2.0};

// Simulation runs shared by criteria 3 and 6.
std::vector<sim::MetricsReport> g_runs;
std::vector<std::pair<double, double>> g_eta_points;  // (eta, eta_max) over all evaluations

void record(const std::vector<SimPoint>& pts) {
  for (const auto& p : pts) {
    for (const auto& r : p.runs) g_runs.push_back(r);
  }
}

Outcome transition_rows() {
  Outcome o;
  const auto t0 = Clock::now();
  OracleOptions opt;
  opt.starve_below = 1e-300;  // check every row the engine did not flag
  double worst = 0;
  std::string worst_at;
  int rows = 0, flagged = 0;
  for (double lt : kSmallLoads) {
    const auto cfg = osmp::testing::small_instance(lt);
    const auto th = Thresholds::build(cfg);
    for (const auto& s : enumerate_states(cfg.onu)) {
      const auto exact = transition_row(s, cfg, th);
      if (exact.flagged) {
        ++flagged;
        continue;
      }
      const auto emp = sample_transition(s, cfg, 20240601 + rows, kRowTrials, opt);
      const double d = l1_distance(emp, exact.probs);
      if (d > worst) {
        worst = d;
        worst_at = to_string(s) + " at lambda*T_m=" + num("%g", lt);
      }
      ++rows;
    }
  }
  const double secs = since(t0);
  note(o, worst < kL1Row, "worst L1 " + num("%.2e", worst) + " " + worst_at + " over " + std::to_string(rows) +
                              " rows (" + std::to_string(flagged) + " flagged)");
  note(o, secs < kRowBudget, "runtime " + num("%.1f", secs) + " s");
  return o;
}

Outcome stationarity() {
  Outcome o;
  double worst_sum = 0, worst_res = 0, worst_walk = 0;
  int matrices = 0;
  auto check = [&](const NetworkConfig& cfg, bool walk) {
    const auto m = build_matrix(cfg);
    for (int i = 0; i < m.size(); ++i) worst_sum = std::max(worst_sum, std::abs(m.probs.row(i).sum() - 1.0));
    const auto st = stationary_distribution(m);
    Eigen::RowVectorXd pi = st.pi.transpose();
    worst_res = std::max(worst_res, (pi * m.probs - pi).cwiseAbs().maxCoeff());
    if (walk) {
      // the walk measures dwell-weighted time, so compare against the same
      const auto shares = random_walk(m, 99, kWalkSteps);
      double tot = 0;
      for (int i = 0; i < m.size(); ++i) tot += pi[i] * m.dwell[i];
      double l1 = 0;
      for (int i = 0; i < m.size(); ++i) l1 += std::abs(shares[i] - pi[i] * m.dwell[i] / tot);
      worst_walk = std::max(worst_walk, l1);
    }
    ++matrices;
  };
  for (double lt : kSmallLoads) check(osmp::testing::small_instance(lt), true);
  for (double load : default_loads()) check(with_load(default_config(), load), load == 0.5);
  note(o, worst_sum < kRowSumTol, "max |row sum - 1| " + num("%.1e", worst_sum) + " over " +
                                      std::to_string(matrices) + " matrices");
  note(o, worst_res < kResidualTol, "max ||pi P - pi|| " + num("%.1e", worst_res));
  note(o, worst_walk < kL1Walk, "walk L1 " + num("%.2e", worst_walk));
  return o;
}

Outcome analysis_vs_simulation() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto cfg = default_config();
  sim::Scenario sc;
  const std::vector<double> loads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const auto an = analyze_loads(cfg, loads);
  const auto sims = simulate_loads(cfg, sc, loads, default_seeds());
  record(sims);
  double worst = 0, at = 0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const double gap = std::abs(sims[i].mean(&sim::MetricsReport::eta) - an[i].analysis.eta);
    if (gap > worst) worst = gap, at = loads[i];
  }
  note(o, worst <= kSimTol, "oracle max gap " + num("%.4f", worst) + " at load " + num("%g", at));

  sc.predictor = sim::PredictorKind::kMean;
  const auto an_m = analyze_loads(cfg, {0.3, 0.9});
  const auto sims_m = simulate_loads(cfg, sc, {0.3, 0.9}, default_seeds());
  record(sims_m);
  const double g3 = std::abs(sims_m[0].mean(&sim::MetricsReport::eta) - an_m[0].analysis.eta);
  const double g9 = std::abs(sims_m[1].mean(&sim::MetricsReport::eta) - an_m[1].analysis.eta);
  note(o, g9 > g3, "mean-predictor gap " + num("%.4f", g9) + " at 0.9 vs " + num("%.4f", g3) + " at 0.3");
  const double secs = since(t0);
  note(o, secs < kGridBudget, "runtime " + num("%.1f", secs) + " s");
  return o;
}

Outcome mda_gain() {
  Outcome o;
  auto cfg = with_load(default_config(), 0.9);
  cfg.onu.n_th = packets_from_bits(1e6, cfg.onu.packet_bits);
  const double with = analyze(cfg).eta;
  const double without = analyze(cfg, ActivePower::kAlwaysOn).eta;
  sim::Scenario sc;
  const auto s_with = simulate_loads(cfg, sc, {0.9}, default_seeds());
  sc.mda = false;
  const auto s_without = simulate_loads(cfg, sc, {0.9}, default_seeds());
  record(s_with);
  record(s_without);
  const double sim_gain = s_with[0].mean(&sim::MetricsReport::eta) - s_without[0].mean(&sim::MetricsReport::eta);
  note(o, with - without >= kMdaGainFloor,
       "analytic gain " + num("%.4f", with - without) + " (" + num("%.4f", with) + " vs " + num("%.4f", without) +
           ")");
  note(o, sim_gain >= kMdaGainFloor, "simulated gain " + num("%.4f", sim_gain));
  return o;
}

std::vector<double> eta_curve(const NetworkConfig& cfg) {
  std::vector<double> out;
  for (const auto& p : analyze_loads(cfg, default_loads())) {
    out.push_back(p.analysis.eta);
    g_eta_points.push_back({p.analysis.eta, 1 - cfg.power.deep_sleep_w / cfg.power.on_w});
  }
  return out;
}

Outcome shape() {
  Outcome o;
  const auto base_cfg = default_config();
  const auto base = eta_curve(base_cfg);
  bool dec = true;
  for (std::size_t i = 1; i < base.size(); ++i) dec = dec && base[i] < base[i - 1];
  note(o, dec, "eta strictly decreasing in load");

  auto compare = [&](const char* label, NetworkConfig cfg, const std::function<bool(double)>& ok) {
    const auto v = eta_curve(cfg);
    bool all = true;
    double lo = INFINITY, hi = -INFINITY;
    std::string bad;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - base[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      if (!ok(d)) {
        all = false;
        bad += (bad.empty() ? "" : ",") + num("%g", default_loads()[i]);
      }
    }
    note(o, all, std::string(label) + " delta in [" + num("%+.4f", lo) + "," + num("%+.4f", hi) + "]" +
                     (all ? "" : " off at loads " + bad));
  };

  auto n32 = base_cfg;
  n32.n_onus = 32;
  compare("N 16->32", n32, [](double d) { return d <= -kShiftPoints; });
  auto half = base_cfg;
  half.onu.n_th /= 2;
  compare("N_th halved", half, [](double d) { return d < 0; });
  auto pdz = base_cfg;
  pdz.power.doze_w *= 0.75;
  compare("P_dz -25%", pdz, [](double d) { return d > 0; });
  for (auto [label, field] : {std::pair{"T_sw^ds -25%", &TimingProfile::wake_deep_s},
                              {"T_sw^fs -25%", &TimingProfile::wake_fast_s},
                              {"T_sw^dz -25%", &TimingProfile::wake_doze_s}}) {
    auto c = base_cfg;
    c.timing.*field *= 0.75;
    compare(label, c, [](double d) { return std::abs(d) < kInsignificant; });
  }
  return o;
}

Outcome conservation() {
  Outcome o;
  // extra runs: baseline, mean predictor and bursty traffic over the grid
  const auto cfg = default_config();
  sim::Scenario sc;
  sc.duration_s = 20;
  sc.mda = false;
  record(simulate_loads(cfg, sc, default_loads(), {1, 2}));
  sc.mda = true;
  sc.traffic = sim::TrafficKind::kSelfSimilar;
  record(simulate_loads(cfg, sc, default_loads(), {1, 2}));

  long broken = 0, causality = 0;
  for (const auto& r : g_runs) {
    broken += r.arrivals != r.delivered + r.dropped + r.residual;
    causality += r.causality_violations;
  }
  note(o, broken == 0 && causality == 0,
       std::to_string(g_runs.size()) + " runs, " + std::to_string(broken) + " unbalanced, " +
           std::to_string(causality) + " causality violations");

  double worst_tile = 0;
  int states = 0;
  for (double lt : kSmallLoads) {
    const auto c = osmp::testing::small_instance(lt);
    const auto th = Thresholds::build(c);
    for (const auto& s : enumerate_states(c.onu)) {
      const auto d = dwell_breakdown(s, c, th);
      const double t_no = windows_for(s, c, th).t_no;
      const double p_sleep = is_sleep(s.sc) ? sleep_power(s.sc, c) : 0.0;
      const double e = d.sleep * p_sleep + (d.wake + d.report) * c.power.on_w + d.doze * th.idle_w(c) +
                       d.data * th.p_on_avg;
      worst_tile = std::max({worst_tile, std::abs(d.total() - t_no) / t_no,
                             std::abs(e - state_energy(s, c, th)) / std::max(e, 1e-300)});
      ++states;
    }
  }
  note(o, worst_tile < kTiling, "energy/duration tiling rel err " + num("%.1e", worst_tile) + " over " +
                                    std::to_string(states) + " states");

  const double eta_max = 1 - cfg.power.deep_sleep_w / cfg.power.on_w;
  int out_of_range = 0;
  for (const auto& [eta, hi] : g_eta_points) out_of_range += eta < 0 || eta > hi + 1e-12;
  for (const auto& r : g_runs) out_of_range += r.eta < -1e-12 || r.eta > eta_max + 1e-12;
  note(o, out_of_range == 0, std::to_string(g_eta_points.size() + g_runs.size()) + " eta values in [0, " +
                                 num("%.4f", eta_max) + "], " + std::to_string(out_of_range) + " outside");

  // The no-drop claim is about sleeping: it is checked at every load where
  // the same ONUs kept awake (same seeds, same fixed grant) lose nothing.
  sim::Scenario oracle, awake;
  awake.sleep_enabled = false;
  const auto ctl = simulate_loads(cfg, awake, default_loads(), default_seeds());
  const auto run = simulate_loads(cfg, oracle, default_loads(), default_seeds());
  long drops = 0, excluded_drops = 0;
  std::string checked, excluded;
  for (std::size_t i = 0; i < ctl.size(); ++i) {
    long c = 0, d = 0;
    for (const auto& r : ctl[i].runs) c += r.dropped;
    for (const auto& r : run[i].runs) d += r.dropped;
    auto& list = c == 0 ? checked : excluded;
    list += (list.empty() ? "" : ",") + num("%g", ctl[i].load);
    (c == 0 ? drops : excluded_drops) += d;
  }
  note(o, drops == 0 && !checked.empty(),
       std::to_string(drops) + " drops under the oracle at loads {" + checked + "}; loads {" + excluded +
           "} overflow even when kept awake (" + std::to_string(excluded_drops) + " drops there)");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "osmp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = OSMP_CLI;
  const std::string spec = (dir / "spec.json").string();
  std::ofstream(spec) << R"({"values": [0.2, 0.6], "seeds": [1, 2], "duration": 5,
    "scenarios": [{"name": "a"}, {"name": "s", "evaluator": "simulation", "traffic": "selfsimilar"}]})";

  const std::vector<std::pair<std::string, std::string>> jobs{
      {"analyze.csv", "analyze"},
      {"simulate.csv", "simulate --loads 0.3,0.6 --seeds 1,2 --duration 5"},
      {"selfsimilar.csv", "simulate --loads 0.5 --seeds 3 --duration 5 --traffic selfsimilar --predictor mean"},
      {"validate.csv", "validate --loads 0.4 --seeds 1,2 --duration 5"},
  };
  int identical = 0, total = 0, bad = 0;
  auto sh = [](const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()) != 0 ? 1 : 0; };
  for (const char* run : {"r1", "r2"}) {
    const auto workers = std::string(run) == "r1" ? " --workers 1" : " --workers 3";
    fs::create_directories(dir / run);
    for (const auto& [file, args] : jobs) {
      bad += sh(cli + " " + args + workers + " --out " + (dir / run / file).string());
    }
    bad += sh(cli + " sweep --spec " + spec + workers + " --out " + (dir / run / "sweep").string());
  }
  for (const auto& e : fs::recursive_directory_iterator(dir / "r1")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "r1");
    const auto a = slurp(e.path()), b = slurp(dir / "r2" / rel);
    ++total;
    identical += !a.empty() && a == b;
  }
  note(o, bad == 0, std::to_string(bad) + " CLI runs failed");
  note(o, total >= 8 && identical == total,
       std::to_string(identical) + "/" + std::to_string(total) + " CSVs byte-identical across runs and worker counts");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) expected.insert(std::stoi(tok));
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"transition rows vs Monte-Carlo oracle", transition_rows},
      {"stochasticity and stationarity", stationarity},
      {"analysis vs simulation", analysis_vs_simulation},
      {"doze-in-active gain at load 0.9", mda_gain},
      {"qualitative shape", shape},
      {"conservation", conservation},
      {"determinism", determinism},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) failed.insert(id);
    std::printf("criterion %d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  if (!expected.empty()) {
    std::printf("expected failures:");
    for (int e : expected) std::printf(" %d", e);
    std::printf("\n");
  }
  return failed == expected ? 0 : 1;
}
