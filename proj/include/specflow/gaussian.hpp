#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specflow/kernels.hpp"
#include "specflow/sigma_measure.hpp"

namespace specflow {

// Truncation of the convolution exponential exp' sigma = sum_{p>=1} sigma^{*p}/p!.
struct SpectralExp {
  std::vector<GridDensity> terms;  // sigma^{*p}/p!, p = 1..P_max, each on its own window
  GridDensity sum;                 // all terms embedded on the widest window
  int p_max;
  double truncation_bound;         // sum_{p > P_max} 1/p!
};

// Iterated convolution with running 1/p! weights. sigma must be
// probability-normalized within `mass_tol`; atomic sigma is rasterized
// first via SigmaMeasure::rasterize by the caller.
SpectralExp exp_prime(const SigmaMeasure& sigma, int p_max,
                      std::optional<kernels::Exec> exec = std::nullopt);

// Stationary covariance r(t) = int cos(t x) d sigma(x); exact per-cell
// integration on grids, exact sums on atoms.
double covariance(const SigmaMeasure& sigma, double t);
std::vector<double> covariance_sweep(const SigmaMeasure& sigma, const std::vector<double>& ts,
                                     std::optional<kernels::Exec> exec = std::nullopt);

// (1/T) int_0^T r(t)^2 dt by composite Simpson with `intervals` intervals.
// Decays to 0 for non-atomic sigma; atoms leave a positive limit.
double mixing_diagnostic(const SigmaMeasure& sigma, double t_horizon,
                         std::size_t intervals = 1 << 16,
                         std::optional<kernels::Exec> exec = std::nullopt);

// For purely atomic symmetric sigma the exact mixing limit:
// sum over positive atoms of 2 w^2, plus w_0^2 for an atom at 0.
double atomic_mixing_limit(const SigmaMeasure& sigma);

struct ProcessSample {
  std::vector<double> times;
  std::vector<double> values;
  int mode_count;
  std::uint64_t seed;
};

// Spectral-representation sample of the stationary Gaussian process with
// spectral measure sigma:
//   X(t) = sum_m sqrt(2 w_m) (xi_m cos(x_m t) + eta_m sin(x_m t)) [+ sqrt(w_0) xi_0]
// where (x_m, w_m) is an equal-mass quantization of the positive half of
// sigma (the factor 2 doubles the half-weights by symmetry) and an atom at 0
// contributes its full weight once. Reproducible from (sigma, times, M, seed).
ProcessSample sample_process(const SigmaMeasure& sigma, const std::vector<double>& times,
                             int mode_count, std::uint64_t seed);

// Monte-Carlo covariance estimates at the given lags: mean over trials of
// X(0) X(lag). Per-trial seeds derive from (seed, trial); the reduction is
// serial over the trial index, so results do not depend on worker count.
std::vector<double> process_covariance_mc(const SigmaMeasure& sigma,
                                          const std::vector<double>& lags, int mode_count,
                                          std::size_t trials, std::uint64_t seed,
                                          std::optional<kernels::Exec> exec = std::nullopt);

struct SelfSimilarityAffinity {
  double affinity_sigma;
  double affinity_exp;
};

// Hellinger affinities of sigma vs sigma_s and of exp' sigma vs its s-image
// (both normalized). Affinity near 0 is evidence that s violates the
// necessary spectral condition for being a self-similarity.
SelfSimilarityAffinity spectral_selfsim_test(const SigmaMeasure& sigma, double s, int p_max,
                                             std::optional<kernels::Exec> exec = std::nullopt);

}  // namespace specflow
