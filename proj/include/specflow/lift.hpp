#pragma once

#include <optional>

#include "specflow/riesz.hpp"
#include "specflow/sigma_measure.hpp"

namespace specflow {

// Parameters of the standard lift of a Riesz-product circle density to the
// real line. Tile k in [-K, K] carries the weight w_k = 2^{-|k|}/3 (the full
// bi-infinite family sums to 1); each tile holds a translated copy of the
// rasterized partial product. Geometric weights make integer translations
// have bounded density ratios, and the mod-1 projection re-stacks the tiles
// exactly proportionally to the circle density.
struct LiftSpec {
  RieszSpec source;
  int tile_count_K = 2;       // tiles |k| <= K
  int partial_index_J = 4;    // partial product order used for the circle density
  std::size_t cells_per_unit = 256;  // power of two; must exceed 4 * n_J

  double tile_weight(int k) const;  // 2^{-|k|}/3
  double captured_mass() const;     // sum of tile weights = 1 - (2/3) 2^{-K}
  double deficit() const { return 1.0 - captured_mass(); }
};

// The lifted density rho' on the real line. The window is the smallest
// power-of-two-sized symmetric integer window containing [-K, K+1).
GridDensity standard_lift(const LiftSpec& spec);

// sigma: the symmetric probability measure on R with sigma restricted to the
// positive axis equal to (1/2) rho' transported through t -> e^t. The grid
// parameters control the rasterization of the transported halves.
SigmaMeasure build_sigma(const GridDensity& rho_prime, double halfwidth = 0.0,
                         std::size_t cells = 4096);

enum class MembershipVerdict { MemberEvidence, DivergenceEvidence };

struct MembershipThresholds {
  double tail_tol = 1e-9;      // last-quarter terms below this count as vanished
  double sum_threshold = 10.0; // small totals with a non-increasing tail also pass
};

struct MembershipReport {
  double s;
  double theta;        // (log |s|) mod 1 fed to the series
  double series;       // S_J(theta)
  MembershipVerdict verdict;
};

// Tests s in H_{R*}(sigma) through the chain
// H_{R*}(sigma) = theta(H_R(rho')) u -theta(H_R(rho')), H_R(rho') = pi^{-1}(H_T(rho)):
// the verdict for s depends only on theta = (log |s|) mod 1. The double
// overload evaluates at the exact dyadic value of log|s| as computed in
// floating point; the exact overload takes log|s| = p/q + integer directly,
// which is the form the eventually-vanishing rational witnesses need.
MembershipReport h_sigma_membership(const RieszSpec& source, double s, int J,
                                    const MembershipThresholds& thr = {});
MembershipReport h_sigma_membership_exact(const RieszSpec& source, int sign,
                                          const ExactFrac& log_s_frac, int J,
                                          const MembershipThresholds& thr = {});

// Verdict rule shared by both entry points (exposed for the CLI).
MembershipVerdict classify_series(const std::vector<double>& terms,
                                  const MembershipThresholds& thr);

}  // namespace specflow
