#pragma once

#include <string>
#include <string_view>

namespace osmp {

struct PowerProfile {
  double on_w = 3.984;
  double doze_w = 2.39;
  double fast_sleep_w = 1.28;
  double deep_sleep_w = 0.75;
};

// Sleep-to-wake-up latencies, the sleep re-decision period T_m and the MPCP
// per-slot overheads.
struct TimingProfile {
  double wake_deep_s = 5.125e-3;
  double wake_fast_s = 125e-6;
  double wake_doze_s = 1e-6;
  double sleep_period_s = 0.5e-3;
  double report_s = 0.512e-6;  // 64-byte MPCP frame at 1 Gb/s
  double guard_s = 1e-6;
};

// Buffer quantities are in packets.
struct OnuConfig {
  int n_th = 40;   // sleep threshold (0.48 Mb of 1500 B packets)
  int n_sz = 100;  // buffer size (1.2 Mb)
  int n_m = 5;     // fixed grant per cycle (60 Kb)
  double lambda_pps = 0.0;
  double packet_bits = 12000.0;
  double max_rate_bps = 100e6;  // rate that defines load = 1
};

struct NetworkConfig {
  int n_onus = 16;
  double link_rate_bps = 1e9;
  OnuConfig onu;
  PowerProfile power;
  TimingProfile timing;
};

// Validates every invariant of the schema; throws Error on the first violation.
void validate(const NetworkConfig& cfg);

NetworkConfig default_config();

// Parses the flat `section.key = value` document. Buffer sizes may be given in
// bits (`onu.n_th_bits`) or packets (`onu.n_th_pkts`), never both.
NetworkConfig load_config(std::string_view text);
NetworkConfig load_config_file(const std::string& path);

// Writes a document that load_config reads back to an identical config.
std::string serialize(const NetworkConfig& cfg);

// Sets one parameter by its document key (or sweep alias such as
// `power.dz`, `n_th`, `load`). Does not validate.
void set_param(NetworkConfig& cfg, std::string_view key, double value);
double get_param(const NetworkConfig& cfg, std::string_view key);

int packets_from_bits(double bits, double packet_bits);

// Fixed-grant polling cycle: N slots of (grant + REPORT + guard).
double cycle_time(const NetworkConfig& cfg);
double slot_time(const NetworkConfig& cfg);
double packet_tx_time(const NetworkConfig& cfg);

// Offered load relative to onu.max_rate_bps.
double load_of(const NetworkConfig& cfg);
NetworkConfig with_load(NetworkConfig cfg, double load);

}  // namespace osmp
