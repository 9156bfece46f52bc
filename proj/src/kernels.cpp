#include "specflow/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace specflow::kernels {

namespace {
Exec g_default = Exec::Parallel;
}

void set_default_exec(Exec e) { g_default = e; }
Exec default_exec() { return g_default; }

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace {

// r[u] = sum_{i+j=u} a_i b_j for one output index, fixed ascending order.
inline double raw_conv_at(std::span<const double> a, std::span<const double> b,
                          std::ptrdiff_t u) {
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
  if (u < 0 || u > na + nb - 2) return 0.0;
  const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, u - (nb - 1));
  const std::ptrdiff_t i_hi = std::min(na - 1, u);
  double s = 0.0;
  for (std::ptrdiff_t i = i_lo; i <= i_hi; ++i) s += a[i] * b[u - i];
  return s;
}

}  // namespace

void convolve_masses_linear(std::span<const double> a, std::span<const double> b,
                            std::span<double> out, Exec exec) {
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(out.size());
  if (out.size() != a.size() + b.size())
    throw std::invalid_argument("convolve_masses_linear: bad output size");
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
  for (std::ptrdiff_t k = 0; k < n_out; ++k)
    out[k] = 0.5 * (raw_conv_at(a, b, k - 1) + raw_conv_at(a, b, k));
#ifndef _OPENMP
  (void)exec;
#endif
}

void convolve_masses_linear_symmetric(std::span<const double> a, std::span<const double> b,
                                      std::span<double> out, Exec exec) {
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(out.size());
  if (out.size() != a.size() + b.size())
    throw std::invalid_argument("convolve_masses_linear_symmetric: bad output size");
  // r has indices 0 .. na+nb-2 and is palindromic when a and b are; compute
  // the lower half once, then out[k] = (r[k-1]+r[k])/2 mirrors exactly.
  const std::ptrdiff_t n_raw = n_out - 1;
  std::vector<double> r(static_cast<std::size_t>(n_raw), 0.0);
  const std::ptrdiff_t half = (n_raw + 1) / 2;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
  for (std::ptrdiff_t u = 0; u < half; ++u) r[u] = raw_conv_at(a, b, u);
  for (std::ptrdiff_t u = half; u < n_raw; ++u) r[u] = r[n_raw - 1 - u];
  out[0] = 0.5 * r[0];
  for (std::ptrdiff_t k = 1; k < n_out - 1; ++k) out[k] = 0.5 * (r[k - 1] + r[k]);
  out[n_out - 1] = 0.5 * r[n_raw - 1];
#ifndef _OPENMP
  (void)exec;
#endif
}

void convolve_masses_circular(std::span<const double> a, std::span<const double> b,
                              std::span<double> out, Exec exec) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  if (b.size() != a.size() || out.size() != a.size())
    throw std::invalid_argument("convolve_masses_circular: size mismatch");
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    // out[k] = (r[k-1] + r[k]) / 2 with indices mod n.
    double rk = 0.0, rkm1 = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t jk = (k - i + n) % n;
      rk += a[i] * b[jk];
      rkm1 += a[i] * b[(jk + n - 1) % n];
    }
    out[k] = 0.5 * (rkm1 + rk);
  }
#ifndef _OPENMP
  (void)exec;
#endif
}

namespace {

std::complex<double> cell_sum_libm(std::span<const double> masses, double lo, double h,
                                   double t) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const double c = lo + (static_cast<double>(i) + 0.5) * h;
    re += masses[i] * std::cos(t * c);
    im += masses[i] * std::sin(t * c);
  }
  return {re, im};
}

std::complex<double> cell_sum_recurrence(std::span<const double> masses, double lo, double h,
                                         double t) {
  // Step a unit phasor across cell centers; renormalize periodically to keep
  // the accumulated drift below ~1e-13.
  const std::complex<double> step(std::cos(t * h), std::sin(t * h));
  std::complex<double> phase(std::cos(t * (lo + 0.5 * h)), std::sin(t * (lo + 0.5 * h)));
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if ((i & 1023u) == 0 && i > 0) {
      const double c = lo + (static_cast<double>(i) + 0.5) * h;
      phase = {std::cos(t * c), std::sin(t * c)};
    }
    acc += masses[i] * phase;
    phase *= step;
  }
  return acc;
}

inline double sinc_half(double t, double h) {
  // (2/t) sin(t h / 2) / h — the exact per-cell integral factor; -> 1 as t->0.
  const double x = 0.5 * t * h;
  if (std::fabs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

std::vector<std::complex<double>> char_function_sweep(std::span<const double> masses,
                                                      double lo, double h,
                                                      std::span<const double> ts, Exec exec,
                                                      bool use_recurrence) {
  std::vector<std::complex<double>> out(ts.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const double t = ts[k];
    const std::complex<double> s =
        use_recurrence ? cell_sum_recurrence(masses, lo, h, t) : cell_sum_libm(masses, lo, h, t);
    out[k] = s * sinc_half(t, h);
  }
#ifndef _OPENMP
  (void)exec;
#endif
  return out;
}

std::vector<double> cos_transform_sweep(std::span<const double> masses, double lo, double h,
                                        std::span<const double> ts, Exec exec,
                                        bool use_recurrence) {
  const auto c = char_function_sweep(masses, lo, h, ts, exec, use_recurrence);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

double simpson(std::span<const double> f, double a, double b) {
  const std::size_t n = f.size() - 1;
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("simpson: need an even number of intervals");
  const double h = (b - a) / static_cast<double>(n);
  double s_odd = 0.0, s_even = 0.0;
  for (std::size_t i = 1; i < n; i += 2) s_odd += f[i];
  for (std::size_t i = 2; i < n; i += 2) s_even += f[i];
  return h / 3.0 * (f[0] + f[n] + 4.0 * s_odd + 2.0 * s_even);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, Exec exec) {
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
#endif
  for (std::ptrdiff_t i = 0; i < m; ++i) body(static_cast<std::size_t>(i));
#ifndef _OPENMP
  (void)exec;
#endif
}

}  // namespace specflow::kernels
