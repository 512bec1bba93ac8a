#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "osmp/config.h"
#include "osmp/dtmc.h"

namespace osmp {

struct EmpiricalRow {
  DtmcState source;
  std::map<DtmcState, long> counts;
  long trials = 0;      // accepted samples
  long attempts = 0;    // draws including rejected ones
  double acceptance = 0;  // probability of the source's conditioning event
};

enum class Conditioning {
  kExact,      // draw the conditioned window count directly, then place its arrivals
  kRejection,  // draw everything, discard draws outside the conditioning event
};

struct OracleOptions {
  Conditioning conditioning = Conditioning::kExact;
  double starve_below = 1e-6;  // ConditioningStarved under this acceptance
  ActivePower active = ActivePower::kMda;
  unsigned workers = 0;  // 0 = all cores; results do not depend on it
};

// Brute-force estimate of the one-step transition distribution out of
// `source`, simulating the protocol's decision rules on Poisson counts over
// the windows that separate two observation instants.
EmpiricalRow sample_transition(const DtmcState& source, const NetworkConfig& cfg, std::uint64_t seed,
                               long trials, const OracleOptions& opt = {});

// Simulates `steps` transitions of the matrix from (on,on,0) and returns each
// state's share of the elapsed dwell time.
std::vector<double> random_walk(const TransitionMatrix& m, std::uint64_t seed, long steps);

double l1_distance(const EmpiricalRow& emp, const Row& exact);

}  // namespace osmp
