#include "osmp/poisson.h"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace osmp {

double poisson_pmf(int l, double mu) {
  if (l < 0) return 0.0;
  if (mu == 0.0) return l == 0 ? 1.0 : 0.0;
  return std::exp(l * std::log(mu) - mu - std::lgamma(l + 1.0));
}

double poisson_cdf(int n, double mu) {
  if (n < 0) return 0.0;
  if (mu == 0.0) return 1.0;
  return boost::math::gamma_q(n + 1.0, mu);
}

double poisson_sf(int n, double mu) {
  if (n <= 0) return 1.0;
  if (mu == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n), mu);
}

PoissonTable::PoissonTable(double mu, int n_max) : mu_(mu), n_max_(n_max) {
  pmf_.resize(n_max + 1);
  cdf_.resize(n_max + 1);
  sf_.resize(n_max + 2);
  for (int i = 0; i <= n_max; ++i) {
    pmf_[i] = poisson_pmf(i, mu);
    cdf_[i] = poisson_cdf(i, mu);
  }
  for (int i = 0; i <= n_max + 1; ++i) sf_[i] = poisson_sf(i, mu);
}

double PoissonTable::pmf(int l) const {
  if (l < 0) return 0.0;
  return l <= n_max_ ? pmf_[l] : poisson_pmf(l, mu_);
}

double PoissonTable::cdf(int n) const {
  if (n < 0) return 0.0;
  return n <= n_max_ ? cdf_[n] : poisson_cdf(n, mu_);
}

double PoissonTable::sf(int n) const {
  if (n <= 0) return 1.0;
  return n <= n_max_ + 1 ? sf_[n] : poisson_sf(n, mu_);
}

}  // namespace osmp
