#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "osmp/config.h"
#include "osmp/sim/traffic.h"
#include "osmp/sleep_policy.h"

namespace osmp::sim {

enum class PredictorKind { kOracle, kMean };
enum class TrafficKind { kPoisson, kSelfSimilar };

const char* predictor_name(PredictorKind k);
const char* traffic_name(TrafficKind k);

struct Scenario {
  bool mda = true;            // false: prior scheme, transceiver on for whole active periods
  bool sleep_enabled = true;  // false: plain work-conserving MPCP, never sleeps
  PredictorKind predictor = PredictorKind::kOracle;
  TrafficKind traffic = TrafficKind::kPoisson;
  OnOffShape shape;  // self-similar traffic only
  double duration_s = 50.0;
  double warmup_s = 1.0;
  double rtt_s = 100e-6;
  std::uint64_t seed = 1;
};

// Event kinds in tie-break priority order for equal timestamps.
enum class EventKind {
  SlotEnd,
  DecisionPoint,
  WakeComplete,
  SleepTimerExpiry,
  GateArrival,
  SlotStart,
  PacketArrival,
};

struct SimEvent {
  double time = 0;
  EventKind kind = EventKind::PacketArrival;
  int onu = 0;
  std::uint64_t seq = 0;  // insertion order, last tie-break
  int grant = 0;          // GateArrival: packets granted

  // min-heap order for std::priority_queue
  bool operator<(const SimEvent& o) const;
};

// Predicts the buffer fill-up time of one ONU.
class Predictor {
 public:
  // trace may be null for live-generated traffic; the oracle then refuses.
  Predictor(PredictorKind kind, double lambda, const Trace* trace);

  // Arrivals expected in (now, now + window].
  double arrivals(double now, double window) const;
  // Time from now until `need` more packets have arrived.
  double fill_time(double now, int need) const;

 private:
  PredictorKind kind_;
  double lambda_;
  const Trace* trace_;
};

enum class PowerLevel { DeepSleep, FastSleep, Doze, On };

struct OnuMachine {
  Mode mode = Mode::Active;
  Mode s_prev = Mode::Active;
  bool waking = false;      // powering up out of a sleep mode
  bool await_gate = false;  // awake after sleep, no GATE seen yet
  bool dozing = false;
  std::deque<double> queue;  // arrival instants of buffered packets
  bool gate_heard = false;   // GATE received for the upcoming slot
  int grant = 0;
  bool reported = false;  // REPORTed in its last slot
  bool armed = false;     // a departure-count decision is pending
  int remaining = 0;      // departures until that decision
  long drops = 0;
  std::size_t next_arrival = 0;  // index into the arrival trace
};

struct MetricsReport {
  double energy_j = 0;     // per ONU, over the measurement window
  double wall_time_s = 0;  // measurement window length
  double eta = 0;
  double mean_delay_s = 0;
  double drop_prob = 0;
  double share_ds = 0, share_fs = 0, share_doze = 0, share_on = 0;
  std::uint64_t seed = 0;
  // whole-run packet accounting, summed over ONUs
  long arrivals = 0, delivered = 0, dropped = 0, residual = 0;
  long decisions = 0;
  // slot transmissions that began before the ONU was awake (must stay 0)
  long causality_violations = 0;
};

MetricsReport run(const NetworkConfig& cfg, const Scenario& scenario);

// Doze schedule of one active cycle under MDA: [slot_start - T_sw^dz, slot_end]
// is spent on, the rest of the cycle in doze. Returns the on-time.
double mda_on_time(double slot_start, double slot_end, const NetworkConfig& cfg);

}  // namespace osmp::sim
