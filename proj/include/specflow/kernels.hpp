#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace specflow::kernels {

// Every kernel below comes in a serial reference version and an OpenMP
// version. Both compute each output element with the identical summation
// order, so their results are bitwise equal and independent of the worker
// count; the serial versions are kept as the trusted baseline for tests and
// for the benchmark target.

enum class Exec { Serial, Parallel };

// Process-wide default used by the higher-level operations.
void set_default_exec(Exec e);
Exec default_exec();

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int worker_count();
void set_worker_count(int n);

// Linear convolution of cell masses. Inputs are cell-mass arrays of two
// densities with equal cell width; out must have size a.size() + b.size()
// and receives the exact per-cell masses of the convolution of the two
// piecewise-constant densities: with r[u] = sum_{i+j=u} a_i b_j, each
// product pair spreads as a triangle over two adjacent output cells, so
// out[k] = (r[k-1] + r[k]) / 2.
void convolve_masses_linear(std::span<const double> a, std::span<const double> b,
                            std::span<double> out, Exec exec);

// Same, assuming both inputs are palindromic (symmetric densities); computes
// half the outputs and mirrors, making the result bitwise symmetric.
void convolve_masses_linear_symmetric(std::span<const double> a, std::span<const double> b,
                                      std::span<double> out, Exec exec);

// Circular convolution of cell masses on the same grid (out size = n).
void convolve_masses_circular(std::span<const double> a, std::span<const double> b,
                              std::span<double> out, Exec exec);

// Characteristic-function sweep for a piecewise-constant density on the
// line: F(t) = sum_i mass_i * e^{i t c_i} * sinc(t h / 2), with the per-cell
// integral evaluated exactly. The parallel version splits over arguments.
// `use_recurrence` evaluates the phase factors by stepping a unit phasor
// (renormalized every 1024 cells) instead of calling sin/cos per cell; it is
// the fast path, the libm evaluation is the reference.
std::vector<std::complex<double>> char_function_sweep(std::span<const double> masses,
                                                      double lo, double h,
                                                      std::span<const double> ts, Exec exec,
                                                      bool use_recurrence = true);

// Real part only (covariance sweeps of symmetric measures).
std::vector<double> cos_transform_sweep(std::span<const double> masses, double lo, double h,
                                        std::span<const double> ts, Exec exec,
                                        bool use_recurrence = true);

// Composite Simpson quadrature of f over [a,b] with n (even) intervals,
// where f is supplied as precomputed node values (n+1 of them).
double simpson(std::span<const double> node_values, double a, double b);

// Runs `trial(i)` for i in [0,n) with results written into a caller-indexed
// buffer by the callable itself; parallelized over i. The callable must only
// write to slots derived from its own index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec);

}  // namespace specflow::kernels
