#include "osmp/sleep_policy.h"

#include <algorithm>
#include <cmath>

#include "osmp/error.h"

namespace osmp {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::DeepSleep: return "ds";
    case Mode::FastSleep: return "fs";
    case Mode::Active: return "on";
  }
  return "?";
}

namespace {

void require_sleep(Mode m) {
  if (!is_sleep(m)) throw Error(Errc::kNotASleepMode, "expected ds or fs");
}

double report_overhead(const NetworkConfig& cfg) {
  return cfg.timing.report_s + cfg.timing.guard_s + cfg.timing.wake_doze_s;
}

// Power drawn while idle inside an active period.
double idle_power(const NetworkConfig& cfg, ActivePower ap) {
  return ap == ActivePower::kMda ? cfg.power.doze_w : cfg.power.on_w;
}

}  // namespace

double sleep_power(Mode m, const NetworkConfig& cfg) {
  require_sleep(m);
  return m == Mode::DeepSleep ? cfg.power.deep_sleep_w : cfg.power.fast_sleep_w;
}

double wake_time(Mode m, const NetworkConfig& cfg) {
  require_sleep(m);
  return m == Mode::DeepSleep ? cfg.timing.wake_deep_s : cfg.timing.wake_fast_s;
}

double avg_active_power(const NetworkConfig& cfg, ActivePower ap) {
  if (ap == ActivePower::kAlwaysOn) return cfg.power.on_w;
  const double share = cfg.onu.lambda_pps * cfg.onu.packet_bits / cfg.link_rate_bps +
                       report_overhead(cfg) / cycle_time(cfg);
  if (share > 1.0) throw Error(Errc::kOverflowShare, "active share exceeds one cycle");
  return cfg.power.doze_w + share * (cfg.power.on_w - cfg.power.doze_w);
}

double t_mw(Mode m, const NetworkConfig& cfg) {
  return wake_time(m, cfg) + 2.0 * cycle_time(cfg) + cfg.timing.sleep_period_s;
}

double t_lb_ds(const NetworkConfig& cfg, ActivePower) {
  const auto& p = cfg.power;
  const auto& t = cfg.timing;
  if (p.fast_sleep_w == p.deep_sleep_w) throw Error(Errc::kDegeneratePowers, "P_fs == P_ds");
  const double num = t.wake_fast_s * p.fast_sleep_w - t.wake_deep_s * p.deep_sleep_w +
                     (t.wake_deep_s - t.wake_fast_s) * p.on_w;
  return num / (p.fast_sleep_w - p.deep_sleep_w) + 2.0 * cycle_time(cfg) + t.sleep_period_s;
}

double t_lb_fs(const NetworkConfig& cfg, ActivePower ap) {
  const auto& p = cfg.power;
  const auto& t = cfg.timing;
  const double p_avg = avg_active_power(cfg, ap);
  if (p_avg <= p.fast_sleep_w) throw Error(Errc::kFsNeverWorthwhile, "P_on^avg <= P_fs");
  const double idle = idle_power(cfg, ap);
  const double num = t.wake_fast_s * (p.on_w - p.fast_sleep_w) +
                     (2.0 * cycle_time(cfg) + t.sleep_period_s) * (idle - p.fast_sleep_w) +
                     report_overhead(cfg) * (p.on_w - idle);
  return num / (p_avg - p.fast_sleep_w);
}

double sleep_energy(Mode m, double t_bf, const NetworkConfig& cfg, ActivePower ap) {
  if (t_bf < t_mw(m, cfg)) throw Error(Errc::kBufferFillsTooSoon, "t_bf below T_mw");
  const auto& p = cfg.power;
  const double ps = sleep_power(m, cfg);
  const double idle = idle_power(cfg, ap);
  return t_bf * ps + wake_time(m, cfg) * (p.on_w - ps) +
         (2.0 * cycle_time(cfg) + cfg.timing.sleep_period_s) * (idle - ps) +
         report_overhead(cfg) * (p.on_w - idle);
}

Thresholds Thresholds::build(const NetworkConfig& cfg, ActivePower ap) {
  Thresholds th;
  th.active = ap;
  th.t_cm = cycle_time(cfg);
  th.t_m = cfg.timing.sleep_period_s;
  th.t_mw_ds = osmp::t_mw(Mode::DeepSleep, cfg);
  th.t_mw_fs = osmp::t_mw(Mode::FastSleep, cfg);
  th.p_on_avg = avg_active_power(cfg, ap);
  th.t_lb_ds = osmp::t_lb_ds(cfg, ap);
  th.t_lb_fs = osmp::t_lb_fs(cfg, ap);
  th.entry_ds = std::max(th.t_lb_ds, th.t_mw_ds + th.t_m);
  th.entry_fs = std::max(th.t_lb_fs, th.t_mw_fs + th.t_m);
  if (!(th.t_lb_ds > th.t_lb_fs) || !(th.entry_ds > th.entry_fs)) {
    throw Error(Errc::kOrderingViolation, "deep-sleep threshold must exceed fast-sleep threshold");
  }
  return th;
}

double Thresholds::t_mw(Mode m) const {
  require_sleep(m);
  return m == Mode::DeepSleep ? t_mw_ds : t_mw_fs;
}

double Thresholds::entry(Mode m) const {
  require_sleep(m);
  return m == Mode::DeepSleep ? entry_ds : entry_fs;
}

int Thresholds::n_po(Mode m) const {
  // small epsilon keeps an exact multiple from rounding down
  const double q = (entry(m) - t_mw(m)) / t_m;
  return std::max(1, static_cast<int>(std::floor(q + 1e-9)));
}

double Thresholds::idle_w(const NetworkConfig& cfg) const { return idle_power(cfg, active); }

Mode decide_from_sleep(Mode current, double t_bf_next, const Thresholds& th) {
  require_sleep(current);
  return t_bf_next > th.t_mw(current) ? current : Mode::Active;
}

Mode decide_from_active(double t_bf_next, const Thresholds& th) {
  if (t_bf_next > th.entry_ds) return Mode::DeepSleep;
  if (t_bf_next >= th.entry_fs) return Mode::FastSleep;
  return Mode::Active;
}

}  // namespace osmp
