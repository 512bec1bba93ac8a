#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "osmp/config.h"
#include "osmp/sleep_policy.h"

namespace osmp {

struct DtmcState {
  Mode sp = Mode::Active;
  Mode sc = Mode::Active;
  int b = 0;

  auto operator<=>(const DtmcState&) const = default;
};

std::string to_string(const DtmcState& s);  // "(on,ds,3)"

bool is_valid(const DtmcState& s, const OnuConfig& onu);

// Fixed order: ds-ds, fs-fs, on-ds, on-fs, ds-on, fs-on (each b < N_th), then
// on-on for b = 0..N_sz. Size 6*N_th + N_sz + 1.
std::vector<DtmcState> enumerate_states(const OnuConfig& onu);

struct PredictionWindows {
  double t_pc = 0;  // window the current state's prediction covered
  double t_pn = 0;  // window of the next prediction
  double t_no = 0;  // time to the next observation
};

PredictionWindows windows_for(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th);

using Row = std::map<DtmcState, double>;

struct RowResult {
  Row probs;
  // Conditioning event of the source has probability ~0; probs is a
  // placeholder deterministic transition.
  bool flagged = false;
};

RowResult trans_from_sleep(Mode sp, Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th);
RowResult trans_wake(Mode sm, int k, const NetworkConfig& cfg, const Thresholds& th);
RowResult trans_active(int k, const NetworkConfig& cfg, const Thresholds& th);
RowResult transition_row(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th);

// Next-mode probabilities at an active decision with j packets buffered.
struct ModeFactors {
  double ds = 0, fs = 0, on = 0;
};
ModeFactors mode_factors(int j, const NetworkConfig& cfg, const Thresholds& th);

// Time spent in each power level during one sojourn in a state.
struct DwellBreakdown {
  double sleep = 0;   // at P_Sm
  double wake = 0;    // wake-up ramp at P_on
  double doze = 0;    // waiting for the first GATE, idle power
  double report = 0;  // GATE lead + REPORT + guard at P_on
  double data = 0;    // active cycles at P_on^avg

  double total() const { return sleep + wake + doze + report + data; }
};

DwellBreakdown dwell_breakdown(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th);
double state_energy(const DtmcState& s, const NetworkConfig& cfg, const Thresholds& th);

struct TransitionMatrix {
  std::vector<DtmcState> states;
  Eigen::MatrixXd probs;
  std::vector<double> dwell;
  std::vector<double> energy;
  std::vector<bool> flagged;

  int index_of(const DtmcState& s) const;  // -1 if absent
  int size() const { return static_cast<int>(states.size()); }
};

TransitionMatrix build_matrix(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);

// CSV dumps: (sp,sc,b,sp2,sc2,b2,p) for nonzero entries, and
// (sp,sc,b,dwell_s,energy_j).
void write_matrix_csv(const TransitionMatrix& m, std::ostream& probs, std::ostream& sidecar);

struct Stationary {
  Eigen::VectorXd pi;  // full length; zero outside the recurrent class
  double residual = 0;
  int class_size = 0;
  long iterations = 0;  // power-iteration steps used
  double flagged_mass = 0;
};

struct StationaryOptions {
  long max_iter = 1000000;
  double tol = 1e-10;
  int start = -1;  // index of the start state; -1 means (on,on,0)
};

Stationary stationary_distribution(const TransitionMatrix& m, const StationaryOptions& opt = {});
Stationary stationary_distribution(const Eigen::MatrixXd& p, int start,
                                   const StationaryOptions& opt = {});

double average_power(const Eigen::VectorXd& pi, const TransitionMatrix& m);
double energy_efficiency(double p_avg, const NetworkConfig& cfg);

struct Analysis {
  double eta = 0;
  double p_avg = 0;
  int n_states = 0;
  double residual = 0;
  double flagged_mass = 0;
};

Analysis analyze(const NetworkConfig& cfg, ActivePower ap = ActivePower::kMda);

}  // namespace osmp
