#pragma once

#include <vector>

namespace osmp {

double poisson_pmf(int l, double mu);
// P(X <= n)
double poisson_cdf(int n, double mu);
// P(X >= n), from the regularized incomplete gamma so the tail is never
// formed as 1 - cdf.
double poisson_sf(int n, double mu);

// pmf/cdf/sf for one mean over 0..n_max; out-of-range queries fall back to
// the free functions.
class PoissonTable {
 public:
  PoissonTable() = default;
  PoissonTable(double mu, int n_max);

  double mu() const { return mu_; }
  double pmf(int l) const;
  double cdf(int n) const;
  double sf(int n) const;

 private:
  double mu_ = 0;
  int n_max_ = -1;
  std::vector<double> pmf_, cdf_, sf_;
};

}  // namespace osmp
