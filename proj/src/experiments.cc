#include "osmp/experiments.h"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "osmp/error.h"
#include "osmp/parallel.h"

namespace osmp {

namespace {

unsigned pick(unsigned workers) { return workers ? workers : default_workers(); }

sim::PredictorKind parse_predictor(const std::string& s) {
  if (s == "oracle") return sim::PredictorKind::kOracle;
  if (s == "mean") return sim::PredictorKind::kMean;
  throw Error(Errc::kUsage, "unknown predictor '" + s + "'");
}

sim::TrafficKind parse_traffic(const std::string& s) {
  if (s == "poisson") return sim::TrafficKind::kPoisson;
  if (s == "selfsimilar") return sim::TrafficKind::kSelfSimilar;
  throw Error(Errc::kUsage, "unknown traffic '" + s + "'");
}

bool is_axis(const std::string& a) {
  return a == "load" || a == "n_onus" || a == "n_th" || a == "n_m" || a.rfind("power.", 0) == 0 ||
         a.rfind("timing.", 0) == 0;
}

NetworkConfig point_config(NetworkConfig cfg, const SweepSpec& spec, const SweepScenario& sc, double value) {
  for (const auto& [k, v] : sc.overrides) set_param(cfg, k, v);
  for (const auto& [k, f] : sc.scales) set_param(cfg, k, get_param(cfg, k) * f);
  if (spec.axis == "load") return with_load(cfg, value);
  set_param(cfg, spec.axis, value);
  return with_load(cfg, spec.base_load);
}

}  // namespace

std::vector<double> default_loads() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }
std::vector<std::uint64_t> default_seeds() { return {1, 2, 3, 4, 5}; }

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<LoadPoint> analyze_loads(const NetworkConfig& cfg, const std::vector<double>& loads,
                                     ActivePower ap, unsigned workers) {
  std::vector<LoadPoint> out(loads.size());
  parallel_for(
      loads.size(),
      [&](std::size_t i) {
        out[i].load = loads[i];
        out[i].analysis = analyze(with_load(cfg, loads[i]), ap);
      },
      pick(workers));
  return out;
}

std::string analyze_csv(const std::vector<LoadPoint>& points) {
  std::ostringstream os;
  os << "load,eta_analytical,p_avg_w,n_states,residual\n";
  for (const auto& p : points) {
    os << fmt_num(p.load) << ',' << fmt_num(p.analysis.eta) << ',' << fmt_num(p.analysis.p_avg) << ','
       << p.analysis.n_states << ',' << fmt_num(p.analysis.residual) << '\n';
  }
  return os.str();
}

double SimPoint::mean(double sim::MetricsReport::*field) const {
  double s = 0;
  for (const auto& r : runs) s += r.*field;
  return runs.empty() ? 0.0 : s / runs.size();
}

double SimPoint::eta_std() const {
  if (runs.size() < 2) return 0.0;
  const double m = mean(&sim::MetricsReport::eta);
  double ss = 0;
  for (const auto& r : runs) ss += (r.eta - m) * (r.eta - m);
  return std::sqrt(ss / (runs.size() - 1));
}

std::vector<SimPoint> simulate_loads(const NetworkConfig& cfg, const sim::Scenario& base,
                                     const std::vector<double>& loads,
                                     const std::vector<std::uint64_t>& seeds, unsigned workers) {
  std::vector<SimPoint> out(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) {
    out[i].load = loads[i];
    out[i].runs.resize(seeds.size());
  }
  parallel_for(
      loads.size() * seeds.size(),
      [&](std::size_t task) {
        const std::size_t li = task / seeds.size(), si = task % seeds.size();
        sim::Scenario sc = base;
        sc.seed = seeds[si];
        out[li].runs[si] = sim::run(with_load(cfg, loads[li]), sc);
      },
      pick(workers));
  return out;
}

std::string simulate_csv(const NetworkConfig& cfg, const sim::Scenario& base,
                         const std::vector<SimPoint>& points) {
  std::ostringstream os;
  os << "seed,load,n_onus,n_th_pkts,n_m_pkts,predictor,traffic,mda,eta,mean_delay_s,drop_prob,"
        "share_ds,share_fs,share_doze,share_on,eta_std\n";
  const std::string fixed = std::to_string(cfg.n_onus) + ',' + std::to_string(cfg.onu.n_th) + ',' +
                            std::to_string(cfg.onu.n_m) + ',' + sim::predictor_name(base.predictor) +
                            ',' + sim::traffic_name(base.traffic) + ',' + (base.mda ? "1" : "0");
  using R = sim::MetricsReport;
  for (const auto& p : points) {
    for (const auto& r : p.runs) {
      os << r.seed << ',' << fmt_num(p.load) << ',' << fixed << ',' << fmt_num(r.eta) << ','
         << fmt_num(r.mean_delay_s) << ',' << fmt_num(r.drop_prob) << ',' << fmt_num(r.share_ds) << ','
         << fmt_num(r.share_fs) << ',' << fmt_num(r.share_doze) << ',' << fmt_num(r.share_on) << ",\n";
    }
  }
  for (const auto& p : points) {
    os << "summary," << fmt_num(p.load) << ',' << fixed << ',' << fmt_num(p.mean(&R::eta)) << ','
       << fmt_num(p.mean(&R::mean_delay_s)) << ',' << fmt_num(p.mean(&R::drop_prob)) << ','
       << fmt_num(p.mean(&R::share_ds)) << ',' << fmt_num(p.mean(&R::share_fs)) << ','
       << fmt_num(p.mean(&R::share_doze)) << ',' << fmt_num(p.mean(&R::share_on)) << ','
       << fmt_num(p.eta_std()) << '\n';
  }
  return os.str();
}

std::vector<ValidatePoint> validate_loads(const NetworkConfig& cfg, const sim::Scenario& base,
                                          const std::vector<double>& loads,
                                          const std::vector<std::uint64_t>& seeds, double tolerance,
                                          unsigned workers) {
  const auto ap = base.mda ? ActivePower::kMda : ActivePower::kAlwaysOn;
  const auto an = analyze_loads(cfg, loads, ap, workers);
  const auto sims = simulate_loads(cfg, base, loads, seeds, workers);
  std::vector<ValidatePoint> out;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    ValidatePoint v;
    v.load = loads[i];
    v.eta_dtmc = an[i].analysis.eta;
    v.eta_sim = sims[i].mean(&sim::MetricsReport::eta);
    v.gap = std::abs(v.eta_sim - v.eta_dtmc);
    v.tolerance = tolerance;
    v.pass = v.gap <= tolerance;
    out.push_back(v);
  }
  return out;
}

std::string validate_csv(const std::vector<ValidatePoint>& points) {
  std::ostringstream os;
  os << "load,eta_dtmc,eta_sim,abs_gap,tolerance,pass\n";
  for (const auto& v : points) {
    os << fmt_num(v.load) << ',' << fmt_num(v.eta_dtmc) << ',' << fmt_num(v.eta_sim) << ','
       << fmt_num(v.gap) << ',' << fmt_num(v.tolerance) << ',' << (v.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, std::string("sweep spec: ") + e.what());
  }
  try {
    SweepSpec spec;
    spec.axis = j.value("axis", std::string("load"));
    if (!is_axis(spec.axis)) throw Error(Errc::kUsage, "unknown sweep axis '" + spec.axis + "'");
    spec.values = j.at("values").get<std::vector<double>>();
    if (spec.values.empty()) throw Error(Errc::kUsage, "sweep values must not be empty");
    if (!std::is_sorted(spec.values.begin(), spec.values.end())) {
      throw Error(Errc::kUsage, "sweep values must be sorted");
    }
    if (j.contains("seeds")) spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    spec.duration_s = j.value("duration", spec.duration_s);
    spec.base_load = j.value("base_load", spec.base_load);
    spec.canned_studies = j.value("canned_studies", spec.canned_studies);
    spec.plots = j.value("plots", spec.plots);
    for (const auto& s : j.value("scenarios", json::array())) {
      SweepScenario sc;
      sc.name = s.at("name").get<std::string>();
      const auto eval = s.value("evaluator", std::string("analysis"));
      if (eval != "analysis" && eval != "simulation") throw Error(Errc::kUsage, "unknown evaluator '" + eval + "'");
      sc.simulate = eval == "simulation";
      const json overrides = s.value("overrides", json::object());
      const json scales = s.value("scales", json::object());
      for (const auto& [k, v] : overrides.items()) sc.overrides.emplace_back(k, v.get<double>());
      for (const auto& [k, v] : scales.items()) sc.scales.emplace_back(k, v.get<double>());
      sc.sim.predictor = parse_predictor(s.value("predictor", std::string("oracle")));
      sc.sim.traffic = parse_traffic(s.value("traffic", std::string("poisson")));
      sc.sim.shape.hurst = s.value("hurst", sc.sim.shape.hurst);
      sc.sim.mda = s.value("mda", true);
      sc.sim.duration_s = spec.duration_s;
      sc.sim.warmup_s = std::min(sc.sim.warmup_s, spec.duration_s / 5);
      spec.scenarios.push_back(std::move(sc));
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, std::string("sweep spec: ") + e.what());
  }
}

std::vector<SweepOutput> run_sweep(const SweepSpec& spec, const NetworkConfig& cfg, unsigned workers) {
  if (spec.values.empty()) throw Error(Errc::kUsage, "sweep values must not be empty");
  std::vector<SweepOutput> out;
  const std::size_t nv = spec.values.size();

  for (const auto& sc : spec.scenarios) {
    std::ostringstream os;
    if (!sc.simulate) {
      const auto ap = sc.sim.mda ? ActivePower::kMda : ActivePower::kAlwaysOn;
      std::vector<Analysis> res(nv);
      parallel_for(
          nv, [&](std::size_t i) { res[i] = analyze(point_config(cfg, spec, sc, spec.values[i]), ap); },
          pick(workers));
      os << spec.axis << ",eta_analytical,p_avg_w,n_states,residual\n";
      for (std::size_t i = 0; i < nv; ++i) {
        os << fmt_num(spec.values[i]) << ',' << fmt_num(res[i].eta) << ',' << fmt_num(res[i].p_avg) << ','
           << res[i].n_states << ',' << fmt_num(res[i].residual) << '\n';
      }
    } else {
      const std::size_t ns = spec.seeds.size();
      std::vector<SimPoint> pts(nv);
      for (auto& p : pts) p.runs.resize(ns);
      parallel_for(
          nv * ns,
          [&](std::size_t t) {
            sim::Scenario s = sc.sim;
            s.seed = spec.seeds[t % ns];
            pts[t / ns].runs[t % ns] = sim::run(point_config(cfg, spec, sc, spec.values[t / ns]), s);
          },
          pick(workers));
      using R = sim::MetricsReport;
      os << spec.axis << ",eta,eta_std,mean_delay_s,drop_prob,share_ds,share_fs,share_doze,share_on\n";
      for (std::size_t i = 0; i < nv; ++i) {
        const auto& p = pts[i];
        os << fmt_num(spec.values[i]) << ',' << fmt_num(p.mean(&R::eta)) << ',' << fmt_num(p.eta_std()) << ','
           << fmt_num(p.mean(&R::mean_delay_s)) << ',' << fmt_num(p.mean(&R::drop_prob)) << ','
           << fmt_num(p.mean(&R::share_ds)) << ',' << fmt_num(p.mean(&R::share_fs)) << ','
           << fmt_num(p.mean(&R::share_doze)) << ',' << fmt_num(p.mean(&R::share_on)) << '\n';
      }
    }
    out.push_back({sc.name + ".csv", os.str()});
  }

  if (spec.canned_studies) {
    const auto loads = spec.axis == "load" ? spec.values : default_loads();
    struct Study {
      const char* file;
      std::vector<std::pair<const char*, const char*>> params;  // key, column
    };
    const Study studies[] = {
        {"canned_wake_times.csv",
         {{"timing.t_sw_ds_s", "eta_t_sw_ds"}, {"timing.t_sw_fs_s", "eta_t_sw_fs"}, {"timing.t_sw_dz_s", "eta_t_sw_dz"}}},
        {"canned_sleep_powers.csv", {{"power.ds_w", "eta_p_ds"}, {"power.fs_w", "eta_p_fs"}, {"power.dz_w", "eta_p_dz"}}},
    };
    for (const auto& st : studies) {
      const std::size_t nc = st.params.size() + 1;
      std::vector<double> eta(loads.size() * nc);
      parallel_for(
          eta.size(),
          [&](std::size_t t) {
            NetworkConfig c = cfg;
            const std::size_t col = t % nc;
            if (col > 0) {
              const char* key = st.params[col - 1].first;
              set_param(c, key, get_param(c, key) * 0.75);
            }
            eta[t] = analyze(with_load(c, loads[t / nc])).eta;
          },
          pick(workers));
      std::ostringstream os;
      os << "load,eta_base";
      for (const auto& p : st.params) os << ',' << p.second;
      os << '\n';
      for (std::size_t i = 0; i < loads.size(); ++i) {
        os << fmt_num(loads[i]);
        for (std::size_t c = 0; c < nc; ++c) os << ',' << fmt_num(eta[i * nc + c]);
        os << '\n';
      }
      out.push_back({st.file, os.str()});
    }
  }
  return out;
}

std::string gnuplot_script(const std::string& csv_file, const std::string& csv, const std::string& ylabel) {
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> cols;
  std::stringstream hs(header);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);

  std::string png = csv_file.substr(0, csv_file.rfind('.')) + ".png";
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set terminal pngcairo size 800,500\n"
     << "set output '" << png << "'\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << (cols.empty() ? "x" : cols[0]) << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "plot ";
  bool first = true;
  for (std::size_t i = 1; i < cols.size(); ++i) {
    if (cols[i].rfind("eta", 0) != 0 || cols[i] == "eta_std") continue;
    os << (first ? "" : ", ") << "'" << csv_file << "' using 1:" << i + 1 << " with linespoints";
    first = false;
  }
  os << '\n';
  return os.str();
}

}  // namespace osmp
