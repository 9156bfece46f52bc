#include "specflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specflow::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

namespace {

// Acklam's approximation, max relative error ~1.15e-9 before refinement.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  double x = acklam(p);
  // One Halley step against erfc brings this to full double precision.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double poisson_pmf(int j, double mu) {
  if (j < 0) return 0.0;
  if (mu <= 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(-mu + j * std::log(mu) - std::lgamma(static_cast<double>(j) + 1.0));
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_pvalue(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

// Pool bins with small expectation into the running neighbor so the
// chi-square approximation stays valid.
void pool(std::vector<double>& obs, std::vector<double>& exp, double min_expected) {
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    acc_o += obs[i];
    acc_e += exp[i];
    if (acc_e >= min_expected) {
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (!e.empty()) {
      o.back() += acc_o;
      e.back() += acc_e;
    } else {
      o.push_back(acc_o);
      e.push_back(acc_e);
    }
  }
  obs = std::move(o);
  exp = std::move(e);
}

}  // namespace

Chi2Result chi2_goodness_of_fit(const std::vector<double>& observed,
                                const std::vector<double>& expected,
                                double min_expected) {
  std::vector<double> obs = observed, exp = expected;
  pool(obs, exp, min_expected);
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] > 0.0) {
      const double d = obs[i] - exp[i];
      stat += d * d / exp[i];
    }
  }
  const int dof = std::max<int>(1, static_cast<int>(obs.size()) - 1);
  return {stat, dof, chi2_pvalue(stat, dof)};
}

Chi2Result chi2_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                           double min_expected) {
  if (a.size() != b.size()) throw std::invalid_argument("chi2_two_sample: size mismatch");
  std::vector<double> oa, ob;
  double acc_a = 0.0, acc_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc_a += a[i];
    acc_b += b[i];
    if (acc_a + acc_b >= 2.0 * min_expected) {
      oa.push_back(acc_a);
      ob.push_back(acc_b);
      acc_a = acc_b = 0.0;
    }
  }
  if ((acc_a > 0.0 || acc_b > 0.0) && !oa.empty()) {
    oa.back() += acc_a;
    ob.back() += acc_b;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    const double s = oa[i] + ob[i];
    if (s > 0.0) {
      const double d = oa[i] - ob[i];
      stat += d * d / s;
    }
  }
  const int dof = std::max<int>(1, static_cast<int>(oa.size()) - 1);
  return {stat, dof, chi2_pvalue(stat, dof)};
}

}  // namespace specflow::stats
