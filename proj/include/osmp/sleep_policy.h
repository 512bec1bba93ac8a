#pragma once

#include "osmp/config.h"

namespace osmp {

enum class Mode { DeepSleep, FastSleep, Active };

const char* mode_name(Mode m);  // "ds", "fs", "on"

inline bool is_sleep(Mode m) { return m != Mode::Active; }

// How the ONU spends an active period. kMda dozes between its own slots;
// kAlwaysOn is the prior scheme that keeps the transceiver on throughout.
enum class ActivePower { kMda, kAlwaysOn };

double sleep_power(Mode m, const NetworkConfig& cfg);
double wake_time(Mode m, const NetworkConfig& cfg);

// P_on^avg: doze baseline plus the fraction of a cycle spent transmitting data
// and the REPORT (with the doze wake-up lead).
double avg_active_power(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);

double t_mw(Mode m, const NetworkConfig& cfg);
double t_lb_ds(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);
double t_lb_fs(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);

// Energy of one sleep period in mode m whose buffer fills t_bf from now,
// including the wake-up and the two worst-case polling cycles in doze.
double sleep_energy(Mode m, double t_bf, const NetworkConfig& cfg,
                    ActivePower ap = ActivePower::kMda);

struct Thresholds {
  double t_cm = 0;
  double t_m = 0;
  double t_mw_ds = 0;
  double t_mw_fs = 0;
  double t_lb_ds = 0;
  double t_lb_fs = 0;
  double p_on_avg = 0;
  ActivePower active = ActivePower::kMda;
  // Sleep-entry thresholds actually used for decisions. A sleep entered with
  // less than T_mw + T_m of margin would have to wake before its first
  // re-decision, so entry_Sm = max(t_lb_Sm, t_mw_Sm + T_m).
  double entry_ds = 0;
  double entry_fs = 0;

  static Thresholds build(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);

  double t_mw(Mode m) const;
  double entry(Mode m) const;
  // N_po: full sleep periods between entering S_m and its first re-decision.
  int n_po(Mode m) const;
  // Power while idle between own slots of an active period.
  double idle_w(const NetworkConfig& cfg) const;
};

Mode decide_from_sleep(Mode current, double t_bf_next, const Thresholds& th);
Mode decide_from_active(double t_bf_next, const Thresholds& th);

}  // namespace osmp
