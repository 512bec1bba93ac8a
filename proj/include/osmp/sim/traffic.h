#pragma once

#include <cstdint>
#include <vector>

namespace osmp::sim {

// Arrival instants in [0, duration), sorted.
using Trace = std::vector<double>;

Trace poisson_traffic(double lambda, double duration, std::uint64_t seed, std::uint64_t stream = 0);

struct OnOffShape {
  double hurst = 0.8;
  int n_sources = 16;
  double mean_on_s = 1e-3;
  double mean_off_s = 1e-3;  // 0: sources never switch off
};

// Superposition of ON-OFF sources with Pareto(3 - 2H) period lengths; each
// source emits at peak_rate / n_sources while ON.
Trace selfsimilar_traffic(const OnOffShape& shape, double peak_rate, double duration,
                          std::uint64_t seed, std::uint64_t stream = 0);

// Aggregate peak rate giving long-run mean `rate`.
double peak_for_mean_rate(const OnOffShape& shape, double rate);

}  // namespace osmp::sim
