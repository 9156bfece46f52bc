#pragma once

#include <complex>
#include <optional>

#include "specflow/kernels.hpp"
#include "specflow/measure.hpp"

namespace specflow {

// Convolution of two densities on the same domain kind.
//  - circle: circular convolution, both on the same grid;
//  - line charts: linear convolution; inputs need the same cell width, the
//    output window is the Minkowski sum of the input windows, zero-padded
//    symmetrically so the cell count stays a power of two.
// The result holds the exact per-cell masses of the convolution of the two
// piecewise-constant inputs, so the output mass is the product of the input
// masses up to rounding.
GridDensity convolve(const GridDensity& f, const GridDensity& g,
                     std::optional<kernels::Exec> exec = std::nullopt);

enum class MapKind { Scale, Exp, Mod1, Negate };

// Image measure under the named map.
//  - Scale s (s != 0): on the line, window and cells rescale exactly (no
//    interpolation); on pos-reals-log the map is multiplicative, s > 0, and
//    acts as translation by log s.
//  - Exp: real-line -> pos-reals-log; with the log chart this is a domain
//    relabel.
//  - Mod1: real-line -> circle-unit; cells must tile the unit interval
//    (integer cells per unit, window endpoints on the integer lattice).
//  - Negate: x -> -x.
GridDensity pushforward(const GridDensity& m, MapKind kind, double s = 1.0);
AtomicMeasure pushforward(const AtomicMeasure& m, MapKind kind, double s = 1.0);

// Fourier data of a measure. Circle densities take an integer frequency n
// and return the coefficient \int e^{-2 pi i n theta} dm; line-chart
// densities take a real t and return \int e^{i t x} dm. Per-cell integrals
// are evaluated exactly for the piecewise-constant representation.
std::complex<double> transform_eval(const GridDensity& m, double t_or_n);

// Characteristic function of an atomic measure on the line.
std::complex<double> transform_eval(const AtomicMeasure& m, double t);

// Hellinger affinity \int sqrt(f g) of two probability densities on the same
// grid. Requires both masses within `mass_tol` of 1.
double hellinger_affinity(const GridDensity& f, const GridDensity& g,
                          double mass_tol = 1e-6);

// Affinity of the normalized densities (used where the measures under
// comparison are not probabilities, e.g. truncated exponentials).
double hellinger_affinity_normalized(const GridDensity& f, const GridDensity& g);

// Affinity of two atomic measures: sum of sqrt(w w') over exactly
// coincident positions.
double hellinger_affinity(const AtomicMeasure& f, const AtomicMeasure& g);

// (m + negate(m)) / 2. The window must be symmetric about 0, or one-sided
// with an endpoint at 0 (then it is extended to the symmetric hull).
GridDensity symmetrize(const GridDensity& m);

}  // namespace specflow
