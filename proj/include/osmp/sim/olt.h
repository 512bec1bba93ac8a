#pragma once

#include <vector>

#include "osmp/config.h"

namespace osmp::sim {

struct RangingEntry {
  double rtt = 0;    // true round trip
  double t_olt = 0;  // what the OLT measured from the REPORT timestamp
};

// Emulates the MPCP timestamp exchange. An MDA ONU back-dates its REPORT
// timestamp by T_sw^dz, so the OLT believes the round trip is that much longer.
struct RangingTable {
  std::vector<RangingEntry> onus;

  static RangingTable measure(const std::vector<double>& rtt, const std::vector<bool>& mda,
                              double t_sw_dz);
};

struct Grant {
  int onu = 0;
  double gate_send = 0;
  double gate_arrival = 0;
  double slot_start = 0;  // when the ONU starts transmitting
  double slot_len = 0;
};

// Fixed-grant cycle starting at cycle_start: one slot of
// (N_m packets + REPORT + guard) per ONU in index order. Each GATE is sent
// just in time for the OLT's belief about the round trip.
std::vector<Grant> olt_schedule_cycle(double cycle_start, const RangingTable& ranging,
                                      const NetworkConfig& cfg);

}  // namespace osmp::sim
