#include "osmp/sim/olt.h"

namespace osmp::sim {

RangingTable RangingTable::measure(const std::vector<double>& rtt, const std::vector<bool>& mda,
                                   double t_sw_dz) {
  RangingTable table;
  for (std::size_t i = 0; i < rtt.size(); ++i) {
    const double down = rtt[i] / 2, up = rtt[i] - down;
    // OLT sends at 0; the ONU sets its clock to 0 on receipt and replies at
    // local time `hold`.
    const double hold = 10e-6;
    const double stamp = hold - (mda[i] ? t_sw_dz : 0.0);
    const double received = down + hold + up;
    table.onus.push_back({rtt[i], received - stamp});
  }
  return table;
}

std::vector<Grant> olt_schedule_cycle(double cycle_start, const RangingTable& ranging,
                                      const NetworkConfig& cfg) {
  const double slot = slot_time(cfg);
  std::vector<Grant> out;
  for (std::size_t i = 0; i < ranging.onus.size(); ++i) {
    const auto& r = ranging.onus[i];
    Grant g;
    g.onu = static_cast<int>(i);
    g.slot_start = cycle_start + static_cast<double>(i) * slot;
    g.slot_len = slot;
    const double down = r.rtt / 2, up = r.rtt - down;
    g.gate_send = g.slot_start + up - r.t_olt;
    g.gate_arrival = g.gate_send + down;
    out.push_back(g);
  }
  return out;
}

}  // namespace osmp::sim
