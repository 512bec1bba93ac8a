#include "osmp/mc_oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "osmp/error.h"
#include "osmp/parallel.h"
#include "osmp/rng.h"

namespace osmp {

namespace {

constexpr int kShards = 16;

// Poisson(mu) restricted to [lo, hi] (hi < 0: unbounded), sampled by
// inversion on a cumulative table built from p_{i+1} = p_i * mu / (i+1).
class CountDist {
 public:
  CountDist(double mu, int lo, int hi) : lo_(lo) {
    const int top = static_cast<int>(mu + 14.0 * std::sqrt(mu) + 40.0);
    const int last = hi >= 0 ? hi : std::max(top, lo + 40);
    double log_p = -mu;
    double acc = 0;
    for (int i = 0; i <= last; ++i) {
      if (i > 0) log_p += mu > 0 ? std::log(mu / i) : -std::numeric_limits<double>::infinity();
      if (i < lo) continue;
      acc += std::exp(log_p);
      cum_.push_back(acc);
    }
    mass_ = acc;
  }

  double mass() const { return mass_; }

  int sample(Rng& rng) const {
    const double u = rng.uniform() * mass_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return lo_ + static_cast<int>(it - cum_.begin());
  }

 private:
  int lo_;
  double mass_ = 0;
  std::vector<double> cum_;
};

// Time axis of one transition, cut at every window endpoint the protocol
// needs. Counts are drawn per elementary piece; a window's count is the sum
// of its pieces.
class Plan {
 public:
  void cut(double t) { cuts_.push_back(t); }

  void finalize(double lambda) {
    cuts_.push_back(0.0);
    std::sort(cuts_.begin(), cuts_.end());
    cuts_.erase(std::unique(cuts_.begin(), cuts_.end()), cuts_.end());
    for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
      free_.emplace_back(lambda * (cuts_[i + 1] - cuts_[i]), 0, -1);
    }
  }

  int index(double t) const {
    return static_cast<int>(std::lower_bound(cuts_.begin(), cuts_.end(), t) - cuts_.begin());
  }
  int piece_of(double t) const {
    return static_cast<int>(std::upper_bound(cuts_.begin(), cuts_.end(), t) - cuts_.begin()) - 1;
  }
  int pieces() const { return static_cast<int>(free_.size()); }
  const CountDist& free(int i) const { return free_[i]; }

 private:
  std::vector<double> cuts_;
  std::vector<CountDist> free_;
};

struct Source {
  Plan plan;
  // conditioning event: count over [0, cond_end) in [cond_lo, cond_hi]
  bool conditioned = false;
  double cond_end = 0;
  int cond_lo = 0, cond_hi = -1;
  // protocol evaluation on the sampled piece counts
  std::function<DtmcState(const std::vector<int>&, const Plan&)> outcome;
};

int count(const std::vector<int>& c, const Plan& plan, double a, double b) {
  int s = 0;
  for (int i = plan.index(a); i < plan.index(b); ++i) s += c[i];
  return s;
}

double own_cycle(const NetworkConfig& cfg) {
  double slot = cfg.onu.n_m * (cfg.onu.packet_bits / cfg.link_rate_bps);
  slot += cfg.timing.report_s + cfg.timing.guard_s;
  return slot * cfg.n_onus;
}

Source make_source(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th) {
  if (!is_valid(s, cfg.onu)) throw Error(Errc::kInvalidState, "invalid state " + to_string(s));
  const int n_th = cfg.onu.n_th, n_sz = cfg.onu.n_sz, n_m = cfg.onu.n_m;
  const double t_cm = own_cycle(cfg);
  const double t_m = cfg.timing.sleep_period_s;
  auto mw = [&](Mode m) { return wake_time(m, cfg) + 2 * t_cm + t_m; };
  const double e_fs = th.entry_fs, e_ds = th.entry_ds;

  // Active decision at time t0 with j packets: fill time against the two
  // entry thresholds, overflow capped at the buffer size.
  auto decide_active = [=](const std::vector<int>& c, const Plan& p, double t0, int j) {
    if (j >= n_sz) return DtmcState{Mode::Active, Mode::Active, n_sz};
    if (j >= n_th) return DtmcState{Mode::Active, Mode::Active, j};
    if (count(c, p, t0, t0 + e_ds) < n_th - j) return DtmcState{Mode::Active, Mode::DeepSleep, j};
    if (count(c, p, t0, t0 + e_fs) < n_th - j) return DtmcState{Mode::Active, Mode::FastSleep, j};
    return DtmcState{Mode::Active, Mode::Active, j};
  };

  Source src;
  const int k = s.b;
  if (is_sleep(s.sc)) {
    const Mode sm = s.sc;
    const double t_mw = mw(sm);
    double t_pc = t_mw, t_no = t_m;
    if (s.sp == Mode::Active) {
      t_pc = th.entry(sm);
      int n_po = 0;
      while (t_mw + (n_po + 1) * t_m <= t_pc * (1 + 1e-12)) ++n_po;
      t_no = (std::max(n_po, 1) + 1) * t_m;
    }
    src.plan.cut(t_no);
    src.plan.cut(t_pc);
    src.plan.cut(t_no + t_mw);
    src.conditioned = true;
    src.cond_end = t_pc;
    src.cond_lo = 0;
    src.cond_hi = n_th - k - 1;
    src.outcome = [=](const std::vector<int>& c, const Plan& p) {
      const int j = k + count(c, p, 0, t_no);
      const bool stay = count(c, p, t_no, t_no + t_mw) < n_th - j;
      return DtmcState{sm, stay ? sm : Mode::Active, j};
    };
  } else if (is_sleep(s.sp)) {
    const double t_mw = mw(s.sp);
    const double t_mo = wake_time(s.sp, cfg) + ((n_th + n_m - 1) / n_m + 0.5) * t_cm;
    for (double t : {t_mw, t_mo, t_mo + e_fs, t_mo + e_ds}) src.plan.cut(t);
    src.conditioned = true;
    src.cond_end = t_mw;
    src.cond_lo = n_th - k;
    src.cond_hi = -1;
    src.outcome = [=](const std::vector<int>& c, const Plan& p) {
      const int j = k + count(c, p, 0, t_mo) - n_th;
      return decide_active(c, p, t_mo, j);
    };
  } else {
    int cycles = 0;
    for (int sent = 0; sent < k; sent += n_m) ++cycles;
    const double t_no = std::max(cycles, 1) * t_cm;
    for (double t : {t_no, e_fs, t_no + e_fs, t_no + e_ds}) src.plan.cut(t);
    if (k < n_th) {
      src.conditioned = true;
      src.cond_end = e_fs;
      src.cond_lo = n_th - k;
      src.cond_hi = -1;
    }
    src.outcome = [=](const std::vector<int>& c, const Plan& p) {
      return decide_active(c, p, t_no, count(c, p, 0, t_no));
    };
  }
  src.plan.finalize(cfg.onu.lambda_pps);
  return src;
}

}  // namespace

EmpiricalRow sample_transition(const DtmcState& source, const NetworkConfig& cfg, std::uint64_t seed,
                               long trials, const OracleOptions& opt) {
  if (trials < 1) throw Error(Errc::kUsage, "trials must be >= 1");
  const auto th = Thresholds::build(cfg, opt.active);
  const Source src = make_source(source, cfg, th);
  const Plan& plan = src.plan;
  const int n_pieces = plan.pieces();
  const int cond_pieces = src.conditioned ? plan.index(src.cond_end) : 0;
  const double lambda = cfg.onu.lambda_pps;

  double acceptance = 1.0;
  std::optional<CountDist> cond;
  if (src.conditioned) {
    cond.emplace(lambda * src.cond_end, src.cond_lo, src.cond_hi);
    acceptance = cond->mass();
    if (acceptance < opt.starve_below) {
      throw Error(Errc::kConditioningStarved,
                  "acceptance " + std::to_string(acceptance) + " for " + to_string(source));
    }
  }

  struct Shard {
    std::map<DtmcState, long> counts;
    long attempts = 0;
  };
  std::vector<Shard> shards(kShards);
  parallel_for(
      kShards,
      [&](std::size_t sh) {
        Rng rng(seed, sh);
        const long quota = trials / kShards + (static_cast<long>(sh) < trials % kShards ? 1 : 0);
        const long max_attempts =
            static_cast<long>(std::min(9e18, static_cast<double>(quota) / opt.starve_below));
        std::vector<int> c(n_pieces);
        auto& out = shards[sh];
        for (long done = 0; done < quota;) {
          if (src.conditioned && opt.conditioning == Conditioning::kExact) {
            std::fill(c.begin(), c.end(), 0);
            const int total = cond->sample(rng);
            // given the total, arrivals are uniform over the window
            for (int a = 0; a < total; ++a) ++c[plan.piece_of(rng.uniform() * src.cond_end)];
            for (int i = cond_pieces; i < n_pieces; ++i) c[i] = plan.free(i).sample(rng);
          } else {
            for (int i = 0; i < n_pieces; ++i) c[i] = plan.free(i).sample(rng);
          }
          ++out.attempts;
          if (src.conditioned && opt.conditioning == Conditioning::kRejection) {
            int in = 0;
            for (int i = 0; i < cond_pieces; ++i) in += c[i];
            const bool ok = in >= src.cond_lo && (src.cond_hi < 0 || in <= src.cond_hi);
            if (!ok) {
              if (out.attempts >= max_attempts) {
                throw Error(Errc::kConditioningStarved, "rejection sampler starved for " + to_string(source));
              }
              continue;
            }
          }
          ++out.counts[src.outcome(c, plan)];
          ++done;
        }
      },
      opt.workers ? opt.workers : default_workers());

  EmpiricalRow row;
  row.source = source;
  row.trials = trials;
  for (const auto& sh : shards) {
    row.attempts += sh.attempts;
    for (const auto& [t, n] : sh.counts) row.counts[t] += n;
  }
  row.acceptance = src.conditioned && opt.conditioning == Conditioning::kRejection
                       ? static_cast<double>(trials) / row.attempts
                       : acceptance;
  return row;
}

std::vector<double> random_walk(const TransitionMatrix& m, std::uint64_t seed, long steps) {
  if (steps < 1) throw Error(Errc::kUsage, "steps must be >= 1");
  const int n = m.size();
  std::vector<std::vector<double>> cum(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    double acc = 0;
    for (int j = 0; j < n; ++j) cum[i][j] = (acc += m.probs(i, j));
  }
  Rng rng(seed, 0);
  std::vector<double> time(n, 0.0);
  int s = m.index_of({Mode::Active, Mode::Active, 0});
  for (long step = 0; step < steps; ++step) {
    const auto& row = cum[s];
    const double u = rng.uniform() * row.back();
    auto it = std::upper_bound(row.begin(), row.end(), u);
    if (it == row.end()) --it;
    s = static_cast<int>(it - row.begin());
    time[s] += m.dwell[s];
  }
  double total = 0;
  for (double t : time) total += t;
  for (double& t : time) t /= total;
  return time;
}

double l1_distance(const EmpiricalRow& emp, const Row& exact) {
  double d = 0;
  for (const auto& [t, p] : exact) {
    auto it = emp.counts.find(t);
    const double q = it == emp.counts.end() ? 0.0 : static_cast<double>(it->second) / emp.trials;
    d += std::abs(p - q);
  }
  for (const auto& [t, n] : emp.counts) {
    if (!exact.count(t)) d += static_cast<double>(n) / emp.trials;
  }
  return d;
}

}  // namespace osmp
