#include "osmp/sim/simulator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "osmp/error.h"
#include "osmp/sim/olt.h"

namespace osmp::sim {

const char* predictor_name(PredictorKind k) { return k == PredictorKind::kOracle ? "oracle" : "mean"; }
const char* traffic_name(TrafficKind k) { return k == TrafficKind::kPoisson ? "poisson" : "selfsimilar"; }

bool SimEvent::operator<(const SimEvent& o) const {
  if (time != o.time) return time > o.time;
  if (kind != o.kind) return kind > o.kind;
  if (onu != o.onu) return onu > o.onu;
  return seq > o.seq;
}

Predictor::Predictor(PredictorKind kind, double lambda, const Trace* trace)
    : kind_(kind), lambda_(lambda), trace_(trace) {
  if (kind == PredictorKind::kOracle && !trace) {
    throw Error(Errc::kOracleUnavailable, "oracle predictor needs a pre-generated arrival trace");
  }
}

double Predictor::arrivals(double now, double window) const {
  if (window <= 0) return 0.0;
  if (kind_ == PredictorKind::kMean) return lambda_ * window;
  const auto lo = std::upper_bound(trace_->begin(), trace_->end(), now);
  const auto hi = std::upper_bound(lo, trace_->end(), now + window);
  return static_cast<double>(hi - lo);
}

double Predictor::fill_time(double now, int need) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (need <= 0) return 0.0;
  if (kind_ == PredictorKind::kMean) return lambda_ > 0 ? need / lambda_ : inf;
  const auto first = std::upper_bound(trace_->begin(), trace_->end(), now) - trace_->begin();
  const auto idx = static_cast<std::size_t>(first) + static_cast<std::size_t>(need) - 1;
  return idx < trace_->size() ? (*trace_)[idx] - now : inf;
}

double mda_on_time(double slot_start, double slot_end, const NetworkConfig& cfg) {
  return slot_end - (slot_start - cfg.timing.wake_doze_s);
}

namespace {

class Simulation {
 public:
  Simulation(const NetworkConfig& cfg, const Scenario& sc)
      : cfg_(cfg),
        sc_(sc),
        th_(Thresholds::build(cfg, sc.mda ? ActivePower::kMda : ActivePower::kAlwaysOn)),
        n_(cfg.n_onus),
        t_cm_(cycle_time(cfg)),
        slot_(slot_time(cfg)),
        tx_(packet_tx_time(cfg)),
        win_lo_(sc.warmup_s),
        win_hi_(sc.duration_s) {
    ranging_ = RangingTable::measure(std::vector<double>(n_, sc.rtt_s),
                                     std::vector<bool>(n_, sc.mda), cfg.timing.wake_doze_s);
    const double lambda = cfg.onu.lambda_pps;
    for (int i = 0; i < n_; ++i) {
      if (sc.traffic == TrafficKind::kPoisson) {
        traces_.push_back(poisson_traffic(lambda, sc.duration_s, sc.seed, i));
      } else {
        traces_.push_back(selfsimilar_traffic(sc.shape, peak_for_mean_rate(sc.shape, lambda),
                                              sc.duration_s, sc.seed, i));
      }
    }
    for (int i = 0; i < n_; ++i) predictors_.emplace_back(sc.predictor, lambda, &traces_[i]);
    onus_.resize(n_);
    acct_.resize(n_);
  }

  MetricsReport run() {
    const auto first = olt_schedule_cycle(t_cm_, ranging_, cfg_);
    for (int i = 0; i < n_; ++i) {
      auto& m = onus_[i];
      m.mode = Mode::Active;
      m.s_prev = Mode::Active;
      // start as if a decision with an empty buffer had just been taken
      m.armed = sc_.sleep_enabled;
      m.remaining = 0;
      m.reported = true;
      set_level(i, idle_level(), 0.0);
      lead_.push_back(first[i].slot_start - first[i].gate_arrival);
      push({first[i].gate_arrival, EventKind::GateArrival, i, 0, cfg_.onu.n_m});
      push({first[i].slot_start, EventKind::SlotStart, i});
      push_next_arrival(i);
    }

    while (!heap_.empty()) {
      const SimEvent ev = heap_.top();
      if (ev.time > sc_.duration_s) break;
      heap_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
    if (heap_.empty()) throw Error(Errc::kEventStarvation, "event queue drained before the run ended");
    return report();
  }

 private:
  struct Accounting {
    PowerLevel level = PowerLevel::On;
    double since = 0;
    std::array<double, 4> time{};
  };

  void push(SimEvent ev) {
    ev.seq = seq_++;
    heap_.push(ev);
  }

  void push_next_arrival(int i) {
    auto& m = onus_[i];
    if (m.next_arrival < traces_[i].size()) {
      push({traces_[i][m.next_arrival], EventKind::PacketArrival, i});
    }
  }

  bool in_window(double t) const { return t >= win_lo_ && t <= win_hi_; }

  PowerLevel idle_level() const {
    return sc_.mda ? PowerLevel::Doze : PowerLevel::On;
  }

  void set_level(int i, PowerLevel level, double t) {
    auto& a = acct_[i];
    const double lo = std::max(a.since, win_lo_), hi = std::min(t, win_hi_);
    if (hi > lo) a.time[static_cast<int>(a.level)] += hi - lo;
    a.level = level;
    a.since = t;
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::PacketArrival: on_arrival(ev.onu); break;
      case EventKind::GateArrival: on_gate(ev.onu, ev.grant); break;
      case EventKind::SlotStart: on_slot_start(ev.onu); break;
      case EventKind::SlotEnd: on_slot_end(ev.onu, ev.grant != 0); break;
      case EventKind::DecisionPoint: on_decision(ev.onu); break;
      case EventKind::SleepTimerExpiry: on_sleep_timer(ev.onu); break;
      case EventKind::WakeComplete: on_wake_complete(ev.onu); break;
    }
  }

  void on_arrival(int i) {
    auto& m = onus_[i];
    ++arrivals_;
    if (static_cast<int>(m.queue.size()) >= cfg_.onu.n_sz) {
      ++m.drops;
      ++dropped_;
      if (in_window(now_)) ++win_dropped_;
    } else {
      m.queue.push_back(now_);
    }
    ++m.next_arrival;
    push_next_arrival(i);
  }

  bool awake(const OnuMachine& m) const { return m.mode == Mode::Active && !m.waking; }

  void on_gate(int i, int grant) {
    auto& m = onus_[i];
    if (!awake(m)) return;  // asleep or still powering up: GATE is lost
    m.gate_heard = true;
    m.grant = grant;
    m.await_gate = false;
    if (idle_level() == PowerLevel::Doze) set_level(i, PowerLevel::On, now_);
  }

  void on_slot_start(int i) {
    auto& m = onus_[i];
    const bool used = m.gate_heard;
    double end = now_ + slot_;
    if (used) {
      if (!awake(m)) ++causality_;
      int n = std::min<int>(m.grant, static_cast<int>(m.queue.size()));
      if (m.armed) n = std::min(n, m.remaining);
      for (int p = 0; p < n; ++p) {
        const double done = now_ + (p + 1) * tx_;
        if (in_window(done)) {
          delay_sum_ += done - m.queue.front();
          ++win_delivered_;
        }
        m.queue.pop_front();
        ++delivered_;
      }
      if (m.armed) m.remaining -= n;
      end = now_ + n * tx_ + cfg_.timing.report_s + cfg_.timing.guard_s;
    }
    m.reported = used;
    m.gate_heard = false;
    push({end, EventKind::SlotEnd, i, 0, used ? 1 : 0});

    const double next_start = now_ + t_cm_;
    const int grant = !sc_.sleep_enabled || m.reported ? cfg_.onu.n_m : 0;
    push({next_start - lead_[i], EventKind::GateArrival, i, 0, grant});
    push({next_start, EventKind::SlotStart, i});
  }

  void on_slot_end(int i, bool used) {
    auto& m = onus_[i];
    if (!used) return;
    if (idle_level() == PowerLevel::Doze && !m.gate_heard && awake(m)) set_level(i, PowerLevel::Doze, now_);
    if (sc_.sleep_enabled && m.armed && m.remaining <= 0) push({now_, EventKind::DecisionPoint, i});
  }

  double fill_time(int i) const {
    const int b = static_cast<int>(onus_[i].queue.size());
    return predictors_[i].fill_time(now_, cfg_.onu.n_th - b);
  }

  void on_decision(int i) {
    auto& m = onus_[i];
    ++decisions_;
    const Mode next = decide_from_active(fill_time(i), th_);
    m.s_prev = Mode::Active;
    if (next == Mode::Active) {
      m.armed = true;
      m.remaining = static_cast<int>(m.queue.size());
      return;
    }
    m.mode = next;
    m.armed = false;
    m.gate_heard = false;
    set_level(i, next == Mode::DeepSleep ? PowerLevel::DeepSleep : PowerLevel::FastSleep, now_);
    push({now_ + cfg_.timing.sleep_period_s, EventKind::SleepTimerExpiry, i});
  }

  void on_sleep_timer(int i) {
    auto& m = onus_[i];
    ++decisions_;
    const Mode current = m.mode;
    const Mode next = decide_from_sleep(current, fill_time(i), th_);
    m.s_prev = current;
    if (next == current) {
      push({now_ + cfg_.timing.sleep_period_s, EventKind::SleepTimerExpiry, i});
      return;
    }
    m.mode = Mode::Active;
    m.waking = true;
    set_level(i, PowerLevel::On, now_);
    push({now_ + wake_time(current, cfg_), EventKind::WakeComplete, i});
  }

  void on_wake_complete(int i) {
    auto& m = onus_[i];
    m.waking = false;
    m.await_gate = true;
    m.armed = true;
    m.remaining = cfg_.onu.n_th;
    set_level(i, idle_level(), now_);
  }

  MetricsReport report() {
    MetricsReport r;
    r.seed = sc_.seed;
    std::array<double, 4> t{};
    for (int i = 0; i < n_; ++i) {
      set_level(i, acct_[i].level, sc_.duration_s);
      for (int l = 0; l < 4; ++l) t[l] += acct_[i].time[l];
    }
    const auto& p = cfg_.power;
    const std::array<double, 4> watts{p.deep_sleep_w, p.fast_sleep_w, p.doze_w, p.on_w};
    double total = 0, energy = 0;
    for (int l = 0; l < 4; ++l) {
      total += t[l];
      energy += t[l] * watts[l];
    }
    r.wall_time_s = win_hi_ - win_lo_;
    r.energy_j = energy / n_;
    r.eta = 1.0 - (r.energy_j / r.wall_time_s) / p.on_w;
    r.share_ds = t[0] / total;
    r.share_fs = t[1] / total;
    r.share_doze = t[2] / total;
    r.share_on = t[3] / total;
    r.mean_delay_s = win_delivered_ ? delay_sum_ / win_delivered_ : 0.0;
    r.drop_prob = win_dropped_ + win_delivered_ ? static_cast<double>(win_dropped_) / (win_dropped_ + win_delivered_) : 0.0;
    r.arrivals = arrivals_;
    r.delivered = delivered_;
    r.dropped = dropped_;
    for (const auto& m : onus_) r.residual += static_cast<long>(m.queue.size());
    r.decisions = decisions_;
    r.causality_violations = causality_;
    return r;
  }

  const NetworkConfig& cfg_;
  const Scenario& sc_;
  const Thresholds th_;
  const int n_;
  const double t_cm_, slot_, tx_;
  const double win_lo_, win_hi_;
  RangingTable ranging_;
  std::vector<double> lead_;
  std::vector<Trace> traces_;
  std::vector<Predictor> predictors_;
  std::vector<OnuMachine> onus_;
  std::vector<Accounting> acct_;
  std::priority_queue<SimEvent> heap_;
  std::uint64_t seq_ = 0;
  double now_ = 0;
  long arrivals_ = 0, delivered_ = 0, dropped_ = 0, decisions_ = 0, causality_ = 0;
  long win_delivered_ = 0, win_dropped_ = 0;
  double delay_sum_ = 0;
};

}  // namespace

MetricsReport run(const NetworkConfig& cfg, const Scenario& scenario) {
  validate(cfg);
  if (!(scenario.duration_s > 0)) throw Error(Errc::kUsage, "duration must be > 0");
  if (!(scenario.warmup_s >= 0 && scenario.warmup_s < scenario.duration_s)) {
    throw Error(Errc::kUsage, "warmup must lie inside the run");
  }
  Simulation sim(cfg, scenario);
  return sim.run();
}

}  // namespace osmp::sim
