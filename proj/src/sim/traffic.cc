#include "osmp/sim/traffic.h"

#include <algorithm>
#include <cmath>

#include "osmp/error.h"
#include "osmp/rng.h"

namespace osmp::sim {

Trace poisson_traffic(double lambda, double duration, std::uint64_t seed, std::uint64_t stream) {
  if (lambda < 0) throw Error(Errc::kUnitViolation, "lambda must be >= 0");
  Trace out;
  if (lambda == 0) return out;
  out.reserve(static_cast<std::size_t>(lambda * duration * 1.01) + 16);
  Rng rng(seed, stream);
  for (double t = -std::log(rng.uniform_pos()) / lambda; t < duration;
       t += -std::log(rng.uniform_pos()) / lambda) {
    out.push_back(t);
  }
  return out;
}

double peak_for_mean_rate(const OnOffShape& shape, double rate) {
  if (shape.mean_off_s == 0) return rate;
  return rate * (shape.mean_on_s + shape.mean_off_s) / shape.mean_on_s;
}

Trace selfsimilar_traffic(const OnOffShape& shape, double peak_rate, double duration,
                          std::uint64_t seed, std::uint64_t stream) {
  if (!(shape.hurst > 0.5 && shape.hurst < 1.0)) throw Error(Errc::kUnitViolation, "hurst must be in (0.5, 1)");
  if (shape.n_sources < 1) throw Error(Errc::kUnitViolation, "n_sources must be >= 1");
  Trace out;
  if (peak_rate <= 0) return out;
  const double alpha = 3.0 - 2.0 * shape.hurst;
  const double rate = peak_rate / shape.n_sources;
  auto pareto = [&](Rng& rng, double mean) {
    const double xm = mean * (alpha - 1.0) / alpha;
    return xm / std::pow(rng.uniform_pos(), 1.0 / alpha);
  };

  for (int s = 0; s < shape.n_sources; ++s) {
    Rng rng(seed, (stream << 16) ^ static_cast<std::uint64_t>(s));
    const bool always_on = shape.mean_off_s == 0;
    const double p_on = always_on ? 1.0 : shape.mean_on_s / (shape.mean_on_s + shape.mean_off_s);
    bool on = rng.uniform() < p_on;
    double credit = rng.uniform();  // fraction of a packet already accumulated
    double t = 0;
    while (t < duration) {
      const double len = always_on ? duration - t : pareto(rng, on ? shape.mean_on_s : shape.mean_off_s);
      const double end = std::min(duration, t + len);
      if (on) {
        double next = t + (1.0 - credit) / rate;
        while (next < end) {
          out.push_back(next);
          next += 1.0 / rate;
        }
        credit = 1.0 - (next - end) * rate;
      }
      t = end;
      on = always_on || !on;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace osmp::sim
