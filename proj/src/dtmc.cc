#include "osmp/dtmc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "osmp/error.h"
#include "osmp/poisson.h"

namespace osmp {

namespace {

constexpr double kUnderflow = 1e-300;

// Poisson tables keyed by mean, plus the per-j next-mode factors, shared by
// all rows of one matrix.
class Cache {
 public:
  Cache(const NetworkConfig& cfg, const Thresholds& th)
      : cfg_(cfg), th_(th), lambda_(cfg.onu.lambda_pps), n_max_(cfg.onu.n_sz + cfg.onu.n_th + 2) {}

  const PoissonTable& over(double t) {
    const double mu = lambda_ * t;
    auto it = tables_.find(mu);
    if (it == tables_.end()) it = tables_.emplace(mu, PoissonTable(mu, n_max_)).first;
    return it->second;
  }

  const ModeFactors& factors(int j) {
    if (factors_.empty()) {
      const int n_th = cfg_.onu.n_th;
      factors_.resize(cfg_.onu.n_sz + 1);
      const auto& pds = over(th_.entry_ds);
      const auto& pfs = over(th_.entry_fs);
      const auto& gap = over(th_.entry_ds - th_.entry_fs);
      for (int i = 0; i <= cfg_.onu.n_sz; ++i) {
        ModeFactors f;
        if (i >= n_th) {
          f.on = 1.0;
        } else {
          f.ds = pds.cdf(n_th - i - 1);
          for (int l1 = 0; l1 <= n_th - i - 1; ++l1) f.fs += pfs.pmf(l1) * gap.sf(n_th - i - l1);
          f.on = pfs.sf(n_th - i);
        }
        factors_[i] = f;
      }
    }
    return factors_.at(j);
  }

 private:
  const NetworkConfig& cfg_;
  const Thresholds& th_;
  double lambda_;
  int n_max_;
  std::map<double, PoissonTable> tables_;
  std::vector<ModeFactors> factors_;
};

void add(Row& row, const DtmcState& s, double p) {
  if (p > 0.0) row[s] += p;
}

void require_valid(const DtmcState& s, const OnuConfig& onu) {
  if (!is_valid(s, onu)) throw Error(Errc::kInvalidState, "invalid state " + to_string(s));
}

double wake_dwell(Mode sm, const NetworkConfig& cfg, const Thresholds& th) {
  const int c = (cfg.onu.n_th + cfg.onu.n_m - 1) / cfg.onu.n_m;
  return wake_time(sm, cfg) + (c + 0.5) * th.t_cm;
}

// Spread arrivals j over next-mode targets and route overflow to (on,on,N_sz).
void add_active_targets(Row& row, int j, double p, const ModeFactors& f) {
  add(row, {Mode::Active, Mode::DeepSleep, j}, p * f.ds);
  add(row, {Mode::Active, Mode::FastSleep, j}, p * f.fs);
  add(row, {Mode::Active, Mode::Active, j}, p * f.on);
}

RowResult sleep_row(Mode sp, Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th,
                    Cache& cache) {
  const DtmcState src{sp, sm, k};
  require_valid(src, cfg.onu);
  const int n_th = cfg.onu.n_th;
  const auto w = windows_for(src, cfg, th);
  const auto& pno = cache.over(w.t_no);
  const auto& p1 = cache.over(w.t_pc - w.t_no);
  const auto& p2 = cache.over(w.t_no + w.t_pn - w.t_pc);
  const double denom = cache.over(w.t_pc).cdf(n_th - k - 1);

  RowResult r;
  if (denom < kUnderflow) {
    r.probs[{sm, Mode::Active, k}] = 1.0;
    r.flagged = true;
    return r;
  }
  for (int j = k; j < n_th; ++j) {
    const double y = pno.pmf(j - k);
    double stay = 0, wake = 0;
    for (int l = 0; l <= n_th - j - 1; ++l) {
      stay += p1.pmf(l) * p2.cdf(n_th - j - l - 1);
      wake += p1.pmf(l) * p2.sf(n_th - j - l);
    }
    add(r.probs, {sm, sm, j}, y * stay / denom);
    add(r.probs, {sm, Mode::Active, j}, y * wake / denom);
  }
  return r;
}

RowResult wake_row(Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th, Cache& cache) {
  const DtmcState src{sm, Mode::Active, k};
  require_valid(src, cfg.onu);
  const int n_th = cfg.onu.n_th, n_sz = cfg.onu.n_sz;
  const auto w = windows_for(src, cfg, th);
  if (w.t_no < w.t_pc) {
    throw Error(Errc::kModelRegime, "T_mo < T_mw: wake-up period shorter than its prediction window");
  }
  const auto& ppc = cache.over(w.t_pc);
  const auto& rest = cache.over(w.t_no - w.t_pc);
  const double denom = ppc.sf(n_th - k);

  RowResult r;
  if (denom < kUnderflow) {
    r.probs[{Mode::Active, Mode::DeepSleep, 0}] = 1.0;
    r.flagged = true;
    return r;
  }
  // N_th departures over T_mo, so j = k + arrivals - N_th.
  for (int j = 0; j < n_sz; ++j) {
    const int total = j - k + n_th;
    double joint = 0;
    for (int l = n_th - k; l <= total; ++l) joint += ppc.pmf(l) * rest.pmf(total - l);
    add_active_targets(r.probs, j, joint / denom, cache.factors(j));
  }
  const int m = n_sz + n_th - k;
  double tail = ppc.sf(m);
  for (int l = n_th - k; l <= m - 1; ++l) tail += ppc.pmf(l) * rest.sf(m - l);
  add(r.probs, {Mode::Active, Mode::Active, n_sz}, tail / denom);
  return r;
}

RowResult active_row(int k, const NetworkConfig& cfg, const Thresholds& th, Cache& cache) {
  const DtmcState src{Mode::Active, Mode::Active, k};
  require_valid(src, cfg.onu);
  const int n_th = cfg.onu.n_th, n_sz = cfg.onu.n_sz;
  const auto w = windows_for(src, cfg, th);
  const auto& pno = cache.over(w.t_no);
  RowResult r;

  if (k >= n_th) {
    for (int j = 0; j < n_sz; ++j) add_active_targets(r.probs, j, pno.pmf(j), cache.factors(j));
    add(r.probs, {Mode::Active, Mode::Active, n_sz}, pno.sf(n_sz));
    return r;
  }

  const double denom = cache.over(th.entry_fs).sf(n_th - k);
  if (denom < kUnderflow) {
    r.probs[{Mode::Active, Mode::DeepSleep, 0}] = 1.0;
    r.flagged = true;
    return r;
  }

  if (w.t_no < th.entry_fs) {
    // The source's fill-time window straddles the next decision instant:
    // T1 runs from the next decision to the end of that window, T2 covers
    // the rest of the next fs window, T3 the extension to the ds window.
    const auto& p1 = cache.over(th.entry_fs - w.t_no);
    const auto& p2 = cache.over(w.t_no);
    const auto& p3 = cache.over(th.entry_ds - th.entry_fs);
    const auto& p23 = cache.over(w.t_no + th.entry_ds - th.entry_fs);
    for (int j = 0; j < n_sz; ++j) {
      const int lo = std::max(0, n_th - k - j);
      ModeFactors f;
      for (int l = lo; l <= n_th - j - 1; ++l) {
        const double a = p1.pmf(l);
        f.ds += a * p23.cdf(n_th - j - l - 1);
        double fs = 0;
        for (int m1 = 0; m1 <= n_th - j - l - 1; ++m1) fs += p2.pmf(m1) * p3.sf(n_th - j - l - m1);
        f.fs += a * fs;
        f.on += a * p2.sf(n_th - j - l);
      }
      f.on += p1.sf(std::max(lo, n_th - j));
      add_active_targets(r.probs, j, pno.pmf(j) / denom, f);
    }
    add(r.probs, {Mode::Active, Mode::Active, n_sz}, pno.sf(n_sz) / denom);
    return r;
  }

  // The whole fill-time window of the source lies inside T_no.
  const auto& ppc = cache.over(th.entry_fs);
  const auto& rest = cache.over(w.t_no - th.entry_fs);
  for (int j = 0; j < n_sz; ++j) {
    double joint = 0;
    for (int l = n_th - k; l <= j; ++l) joint += ppc.pmf(l) * rest.pmf(j - l);
    add_active_targets(r.probs, j, joint / denom, cache.factors(j));
  }
  double tail = ppc.sf(std::max(n_sz, n_th - k));
  for (int l = n_th - k; l <= n_sz - 1; ++l) tail += ppc.pmf(l) * rest.sf(n_sz - l);
  add(r.probs, {Mode::Active, Mode::Active, n_sz}, tail / denom);
  return r;
}

RowResult row_for(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th, Cache& cache) {
  if (is_sleep(s.sc)) return sleep_row(s.sp, s.sc, s.b, cfg, th, cache);
  if (is_sleep(s.sp)) return wake_row(s.sp, s.b, cfg, th, cache);
  return active_row(s.b, cfg, th, cache);
}

}  // namespace

std::string to_string(const DtmcState& s) {
  return std::string("(") + mode_name(s.sp) + "," + mode_name(s.sc) + "," + std::to_string(s.b) + ")";
}

bool is_valid(const DtmcState& s, const OnuConfig& onu) {
  if (s.b < 0 || s.b > onu.n_sz) return false;
  if (is_sleep(s.sp) && is_sleep(s.sc) && s.sp != s.sc) return false;
  if ((is_sleep(s.sp) || is_sleep(s.sc)) && s.b >= onu.n_th) return false;
  return true;
}

std::vector<DtmcState> enumerate_states(const OnuConfig& onu) {
  constexpr Mode ds = Mode::DeepSleep, fs = Mode::FastSleep, on = Mode::Active;
  std::vector<DtmcState> out;
  out.reserve(6 * onu.n_th + onu.n_sz + 1);
  for (auto [sp, sc] : {std::pair{ds, ds}, {fs, fs}, {on, ds}, {on, fs}, {ds, on}, {fs, on}}) {
    for (int b = 0; b < onu.n_th; ++b) out.push_back({sp, sc, b});
  }
  for (int b = 0; b <= onu.n_sz; ++b) out.push_back({on, on, b});
  return out;
}

PredictionWindows windows_for(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th) {
  require_valid(s, cfg.onu);
  PredictionWindows w;
  if (is_sleep(s.sc)) {
    w.t_pn = th.t_mw(s.sc);
    if (s.sp == s.sc) {
      w.t_pc = th.t_mw(s.sc);
      w.t_no = th.t_m;
    } else {
      w.t_pc = th.entry(s.sc);
      w.t_no = (th.n_po(s.sc) + 1) * th.t_m;
    }
  } else if (is_sleep(s.sp)) {
    w.t_pc = th.t_mw(s.sp);
    w.t_no = wake_dwell(s.sp, cfg, th);
    w.t_pn = th.entry_ds;
  } else {
    const int n_m = cfg.onu.n_m;
    w.t_pc = s.b < cfg.onu.n_th ? th.entry_fs : 0.0;
    // b = 0 still costs one REPORT-only polling cycle
    w.t_no = s.b == 0 ? th.t_cm : ((s.b + n_m - 1) / n_m) * th.t_cm;
    w.t_pn = th.entry_ds;
  }
  return w;
}

RowResult trans_from_sleep(Mode sp, Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th) {
  if (!is_sleep(sm)) throw Error(Errc::kNotASleepMode, "current mode must be ds or fs");
  Cache cache(cfg, th);
  return sleep_row(sp, sm, k, cfg, th, cache);
}

RowResult trans_wake(Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th) {
  if (!is_sleep(sm)) throw Error(Errc::kNotASleepMode, "previous mode must be ds or fs");
  Cache cache(cfg, th);
  return wake_row(sm, k, cfg, th, cache);
}

RowResult trans_active(int k, const NetworkConfig& cfg, const Thresholds& th) {
  Cache cache(cfg, th);
  return active_row(k, cfg, th, cache);
}

RowResult transition_row(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th) {
  Cache cache(cfg, th);
  return row_for(s, cfg, th, cache);
}

ModeFactors mode_factors(int j, const NetworkConfig& cfg, const Thresholds& th) {
  Cache cache(cfg, th);
  return cache.factors(j);
}

DwellBreakdown dwell_breakdown(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th) {
  const auto w = windows_for(s, cfg, th);
  DwellBreakdown d;
  if (is_sleep(s.sc)) {
    d.sleep = w.t_no;
  } else if (is_sleep(s.sp)) {
    const int c = (cfg.onu.n_th + cfg.onu.n_m - 1) / cfg.onu.n_m;
    d.wake = wake_time(s.sp, cfg);
    d.report = cfg.timing.wake_doze_s + cfg.timing.report_s + cfg.timing.guard_s;
    d.doze = 1.5 * th.t_cm - d.report;
    d.data = (c - 1) * th.t_cm;
  } else {
    d.data = w.t_no;
  }
  return d;
}

double state_energy(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th) {
  const auto d = dwell_breakdown(s, cfg, th);
  const double p_on = cfg.power.on_w;
  const double p_sleep = is_sleep(s.sc) ? sleep_power(s.sc, cfg) : 0.0;
  return d.sleep * p_sleep + (d.wake + d.report) * p_on + d.doze * th.idle_w(cfg) +
         d.data * th.p_on_avg;
}

int TransitionMatrix::index_of(const DtmcState& s) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == s) return static_cast<int>(i);
  }
  return -1;
}

TransitionMatrix build_matrix(const NetworkConfig& cfg, ActivePower ap) {
  validate(cfg);
  const auto th = Thresholds::build(cfg, ap);
  TransitionMatrix m;
  m.states = enumerate_states(cfg.onu);
  const int n = m.size();
  std::map<DtmcState, int> index;
  for (int i = 0; i < n; ++i) index[m.states[i]] = i;

  m.probs = Eigen::MatrixXd::Zero(n, n);
  m.dwell.resize(n);
  m.energy.resize(n);
  m.flagged.resize(n);
  Cache cache(cfg, th);
  for (int i = 0; i < n; ++i) {
    const auto& s = m.states[i];
    auto row = row_for(s, cfg, th, cache);
    for (const auto& [t, p] : row.probs) {
      auto it = index.find(t);
      if (it == index.end()) throw Error(Errc::kInvalidState, "row targets invalid state " + to_string(t));
      m.probs(i, it->second) += p;
    }
    m.flagged[i] = row.flagged;
    m.dwell[i] = dwell_breakdown(s, cfg, th).total();
    m.energy[i] = state_energy(s, cfg, th);
  }
  return m;
}

void write_matrix_csv(const TransitionMatrix& m, std::ostream& probs, std::ostream& sidecar) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  probs << "sp,sc,b,sp2,sc2,b2,p\n";
  sidecar << "sp,sc,b,dwell_s,energy_j\n";
  for (int i = 0; i < m.size(); ++i) {
    const auto& s = m.states[i];
    for (int j = 0; j < m.size(); ++j) {
      if (m.probs(i, j) == 0.0) continue;
      const auto& t = m.states[j];
      probs << mode_name(s.sp) << ',' << mode_name(s.sc) << ',' << s.b << ',' << mode_name(t.sp)
            << ',' << mode_name(t.sc) << ',' << t.b << ',' << num(m.probs(i, j)) << '\n';
    }
    sidecar << mode_name(s.sp) << ',' << mode_name(s.sc) << ',' << s.b << ',' << num(m.dwell[i])
            << ',' << num(m.energy[i]) << '\n';
  }
}

double average_power(const Eigen::VectorXd& pi, const TransitionMatrix& m) {
  double e = 0, t = 0;
  for (int i = 0; i < m.size(); ++i) {
    e += pi[i] * m.energy[i];
    t += pi[i] * m.dwell[i];
  }
  return e / t;
}

double energy_efficiency(double p_avg, const NetworkConfig& cfg) { return 1.0 - p_avg / cfg.power.on_w; }

Analysis analyze(const NetworkConfig& cfg, ActivePower ap) {
  const auto m = build_matrix(cfg, ap);
  const auto st = stationary_distribution(m);
  Analysis a;
  a.p_avg = average_power(st.pi, m);
  a.eta = energy_efficiency(a.p_avg, cfg);
  a.n_states = m.size();
  a.residual = st.residual;
  a.flagged_mass = st.flagged_mass;
  return a;
}

}  // namespace osmp
