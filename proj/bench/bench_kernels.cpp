// Compares the serial reference kernels against the OpenMP versions and
// checks they agree bitwise while reporting the speedup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "specflow/gaussian.hpp"
#include "specflow/kernels.hpp"
#include "specflow/measure_ops.hpp"
#include "specflow/rng.hpp"

using namespace specflow;
using kernels::Exec;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

GridDensity random_density(std::uint64_t seed, std::size_t n) {
  rng::Engine eng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = eng.uniform(0.1, 1.0);
  GridDensity g(Domain::RealLine, -4.0, 4.0, std::move(v));
  return scaled(g, 1.0 / g.mass());
}

bool bitwise_equal(const GridDensity& a, const GridDensity& b) {
  if (!a.same_grid(b)) return false;
  for (std::size_t i = 0; i < a.cells(); ++i)
    if (a.value(i) != b.value(i)) return false;
  return true;
}

}  // namespace

int main() {
  std::printf("workers available: %d\n\n", kernels::worker_count());
  std::printf("%-28s %10s %10s %8s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup",
              "bitwise");

  for (std::size_t n : {std::size_t(4096), std::size_t(16384)}) {
    const auto f = random_density(1, n);
    const auto g = random_density(2, n);
    GridDensity out_s = f, out_p = f;
    const double ts = time_best_of(3, [&] { out_s = convolve(f, g, Exec::Serial); });
    const double tp = time_best_of(3, [&] { out_p = convolve(f, g, Exec::Parallel); });
    std::printf("%-22s n=%-5zu %10.4f %10.4f %7.2fx %8s\n", "linear convolution", n, ts, tp,
                ts / tp, bitwise_equal(out_s, out_p) ? "yes" : "NO");
  }

  {
    const std::size_t n = 8192;
    const auto f = random_density(3, n);
    std::vector<double> masses(n);
    for (std::size_t i = 0; i < n; ++i) masses[i] = f.value(i) * f.cell_width();
    std::vector<double> ts_args(20000);
    for (std::size_t i = 0; i < ts_args.size(); ++i) ts_args[i] = 0.01 * static_cast<double>(i);
    std::vector<std::complex<double>> r_s, r_p;
    const double ts = time_best_of(
        3, [&] { r_s = kernels::char_function_sweep(masses, f.lo(), f.cell_width(), ts_args,
                                                    Exec::Serial); });
    const double tp = time_best_of(
        3, [&] { r_p = kernels::char_function_sweep(masses, f.lo(), f.cell_width(), ts_args,
                                                    Exec::Parallel); });
    std::printf("%-22s n=%-5zu %10.4f %10.4f %7.2fx %8s\n", "transform sweep", n, ts, tp,
                ts / tp, r_s == r_p ? "yes" : "NO");
  }

  {
    const auto sigma = SigmaMeasure::two_atoms(1.0, 0.5);
    const std::vector<double> lags = {0.0, 0.5, 1.0, 2.0};
    std::vector<double> r_s, r_p;
    const double ts = time_best_of(
        3, [&] { r_s = process_covariance_mc(sigma, lags, 64, 40000, 5, Exec::Serial); });
    const double tp = time_best_of(
        3, [&] { r_p = process_covariance_mc(sigma, lags, 64, 40000, 5, Exec::Parallel); });
    std::printf("%-22s n=%-5d %10.4f %10.4f %7.2fx %8s\n", "monte carlo trials", 40000, ts, tp,
                ts / tp, r_s == r_p ? "yes" : "NO");
  }

  {
    const auto sigma = random_density(9, 4096);
    const auto sm = SigmaMeasure::from_grid(symmetrize(sigma));
    SpectralExp e_s = exp_prime(sm, 2, Exec::Serial), e_p = e_s;
    const double ts = time_best_of(2, [&] { e_s = exp_prime(sm, 8, Exec::Serial); });
    const double tp = time_best_of(2, [&] { e_p = exp_prime(sm, 8, Exec::Parallel); });
    std::printf("%-22s n=%-5d %10.4f %10.4f %7.2fx %8s\n", "exp' (8 conv powers)", 4096, ts, tp,
                ts / tp, bitwise_equal(e_s.sum, e_p.sum) ? "yes" : "NO");
  }

  return 0;
}
