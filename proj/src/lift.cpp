#include "specflow/lift.hpp"

#include <algorithm>
#include <cmath>

#include "specflow/measure_ops.hpp"

namespace specflow {

double LiftSpec::tile_weight(int k) const {
  if (std::abs(k) > tile_count_K) return 0.0;
  return std::ldexp(1.0, -std::abs(k)) / 3.0;
}

double LiftSpec::captured_mass() const {
  return 1.0 - (2.0 / 3.0) * std::ldexp(1.0, -tile_count_K);
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

GridDensity standard_lift(const LiftSpec& spec) {
  if (spec.tile_count_K < 0) throw ConfigError("standard_lift: K must be >= 0");
  if (!is_power_of_two(spec.cells_per_unit))
    throw ConfigError("standard_lift: cells_per_unit must be a power of two");
  const BigInt n_J = spec.source.frequency(spec.partial_index_J);
  if (BigInt(4) * n_J >= BigInt(spec.cells_per_unit))
    throw NumericGuardError("standard_lift: grid too coarse (cell width > 1/(4 n_J))");

  const GridDensity circle = partial_product(spec.source, spec.partial_index_J)
                                 .rasterize(spec.cells_per_unit);

  // Smallest power-of-two half-width W with [-K, K+1) inside [-W, W).
  std::size_t W = 1;
  while (static_cast<int>(W) < spec.tile_count_K + 1) W <<= 1;
  const std::size_t r = spec.cells_per_unit;
  const std::size_t total = 2 * W * r;

  std::vector<double> v(total, 0.0);
  for (int k = -spec.tile_count_K; k <= spec.tile_count_K; ++k) {
    const double w = spec.tile_weight(k);
    const std::size_t base = (static_cast<std::size_t>(k + static_cast<int>(W))) * r;
    for (std::size_t i = 0; i < r; ++i) v[base + i] = w * circle.value(i);
  }
  return GridDensity(Domain::RealLine, -static_cast<double>(W), static_cast<double>(W),
                     std::move(v));
}

SigmaMeasure build_sigma(const GridDensity& rho_prime, double halfwidth, std::size_t cells) {
  if (rho_prime.domain() != Domain::RealLine)
    throw ConfigError("build_sigma: rho' must live on the real line");
  // sigma restricted to (0, inf) is (1/2) rho' pushed through t -> e^t; the
  // support of the positive half is [e^lo, e^hi).
  const double s_hi = std::exp(rho_prime.hi());
  if (halfwidth <= 0.0) {
    halfwidth = 1.0;
    while (halfwidth < s_hi) halfwidth *= 2.0;
  } else if (halfwidth < s_hi) {
    throw NumericGuardError("build_sigma: window too small for e^(sup rho' window)");
  }
  if (!is_power_of_two(cells) || cells < 2)
    throw ConfigError("build_sigma: cells must be a power of two >= 2");

  const std::size_t half_cells = cells / 2;
  const double h = halfwidth / static_cast<double>(half_cells);
  std::vector<double> v(cells, 0.0);
  for (std::size_t i = 0; i < half_cells; ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = a + h;
    // Mass of (1/2) rho' on [log a, log b); the a = 0 cell integrates from the
    // bottom of rho's window.
    const double t_lo = a > 0.0 ? std::log(a) : rho_prime.lo();
    const double t_hi = std::log(b);
    const double cell_mass = 0.5 * rho_prime.mass_in(t_lo, t_hi);
    v[half_cells + i] = cell_mass / h;
    v[half_cells - 1 - i] = cell_mass / h;  // mirror
  }
  return SigmaMeasure::from_grid(
      GridDensity(Domain::RealLine, -halfwidth, halfwidth, std::move(v)));
}

MembershipVerdict classify_series(const std::vector<double>& terms,
                                  const MembershipThresholds& thr) {
  if (terms.empty()) return MembershipVerdict::MemberEvidence;
  const std::size_t q = std::max<std::size_t>(1, terms.size() / 4);
  const std::size_t start = terms.size() - q;
  double tail_max = 0.0;
  bool nonincreasing = true;
  for (std::size_t i = start; i < terms.size(); ++i) {
    tail_max = std::max(tail_max, terms[i]);
    if (i > start && terms[i] > terms[i - 1]) nonincreasing = false;
  }
  double total = 0.0;
  for (const double t : terms) total += t;
  if (tail_max < thr.tail_tol) return MembershipVerdict::MemberEvidence;
  if (total < thr.sum_threshold && nonincreasing) return MembershipVerdict::MemberEvidence;
  return MembershipVerdict::DivergenceEvidence;
}

namespace {

MembershipReport membership_from_theta(const RieszSpec& source, double s_label,
                                       const ExactFrac& theta, int J,
                                       const MembershipThresholds& thr) {
  const auto terms = h_membership_terms(source, theta, J);
  double series = 0.0;
  for (const double t : terms) series += t;
  return {s_label, theta.frac_times(1), series, classify_series(terms, thr)};
}

}  // namespace

MembershipReport h_sigma_membership(const RieszSpec& source, double s, int J,
                                    const MembershipThresholds& thr) {
  if (s == 0.0) throw ConfigError("h_sigma_membership: s must be nonzero");
  const double l = std::log(std::fabs(s));
  double theta = l - std::floor(l);
  if (theta >= 1.0) theta = 0.0;  // rounding at the wrap point
  return membership_from_theta(source, s, ExactFrac::from_double(theta), J, thr);
}

MembershipReport h_sigma_membership_exact(const RieszSpec& source, int sign,
                                          const ExactFrac& log_s_frac, int J,
                                          const MembershipThresholds& thr) {
  if (sign == 0) throw ConfigError("h_sigma_membership: s must be nonzero");
  const double s = (sign < 0 ? -1.0 : 1.0) * std::exp(log_s_frac.frac_times(1));
  return membership_from_theta(source, s, log_s_frac, J, thr);
}

}  // namespace specflow
