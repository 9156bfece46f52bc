#pragma once

#include <cstddef>
#include <vector>

namespace specflow::stats {

double normal_cdf(double x);

// Inverse standard normal CDF (Acklam's rational approximation polished with
// one Halley step), accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

// Poisson pmf e^{-mu} mu^j / j!, computed in log space.
double poisson_pmf(int j, double mu);

// Regularized upper incomplete gamma Q(a,x); series/continued-fraction split.
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_pvalue(double statistic, int dof);

// Pearson chi-square of observed counts against expected counts (expected
// need not be normalized; bins with expected below `min_expected` are pooled
// into their neighbor). Returns statistic and the effective dof.
struct Chi2Result {
  double statistic;
  int dof;
  double pvalue;
};
Chi2Result chi2_goodness_of_fit(const std::vector<double>& observed,
                                const std::vector<double>& expected,
                                double min_expected = 5.0);

// Two-sample chi-square on a pair of histograms with equal bin layout.
Chi2Result chi2_two_sample(const std::vector<double>& a,
                           const std::vector<double>& b,
                           double min_expected = 5.0);

}  // namespace specflow::stats
