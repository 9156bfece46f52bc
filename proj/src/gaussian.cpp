#include "specflow/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "specflow/measure_ops.hpp"
#include "specflow/rng.hpp"

namespace specflow {

namespace {

std::vector<double> grid_masses(const GridDensity& g) {
  std::vector<double> m(g.cells());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = g.value(i) * g.cell_width();
  return m;
}

}  // namespace

SpectralExp exp_prime(const SigmaMeasure& sigma, int p_max,
                      std::optional<kernels::Exec> exec) {
  if (p_max < 1) throw ConfigError("exp_prime: P_max must be >= 1");
  if (sigma.is_atomic())
    throw ConfigError("exp_prime: rasterize atomic sigma first (SigmaMeasure::rasterize)");
  const GridDensity& base = sigma.grid();
  if (std::fabs(base.mass() - 1.0) > 1e-6)
    throw NumericGuardError("exp_prime: sigma must be probability-normalized");

  std::vector<GridDensity> terms;
  terms.reserve(static_cast<std::size_t>(p_max));
  GridDensity power = base;  // sigma^{*p}
  double inv_fact = 1.0;     // 1/p!
  terms.push_back(scaled(power, inv_fact));
  for (int p = 2; p <= p_max; ++p) {
    power = convolve(power, base, exec);
    inv_fact /= static_cast<double>(p);
    terms.push_back(scaled(power, inv_fact));
  }

  // Embed every term on the widest window (they are all symmetric and share
  // the cell width, so the grids align).
  const GridDensity& widest = terms.back();
  GridDensity sum = GridDensity::zeros(Domain::RealLine, widest.lo(), widest.hi(), widest.cells());
  for (const auto& t : terms) sum = add_scaled(sum, embed(t, widest.lo(), widest.hi(), widest.cells()), 1.0);

  double tail = 0.0, f = 1.0;
  for (int p = 1; p <= p_max; ++p) f *= static_cast<double>(p);
  double inc = 1.0 / f;
  for (int p = p_max + 1; p <= p_max + 40; ++p) {
    inc /= static_cast<double>(p);
    tail += inc;
  }
  return {std::move(terms), std::move(sum), p_max, tail};
}

double covariance(const SigmaMeasure& sigma, double t) {
  if (sigma.is_atomic()) {
    double r = 0.0;
    for (const auto& [x, w] : sigma.atoms().atoms()) r += w * std::cos(t * x);
    return r;
  }
  return transform_eval(sigma.grid(), t).real();
}

std::vector<double> covariance_sweep(const SigmaMeasure& sigma, const std::vector<double>& ts,
                                     std::optional<kernels::Exec> exec) {
  const auto e = exec.value_or(kernels::default_exec());
  if (sigma.is_atomic()) {
    std::vector<double> out(ts.size());
    kernels::parallel_for(
        ts.size(),
        [&](std::size_t i) {
          double r = 0.0;
          for (const auto& [x, w] : sigma.atoms().atoms()) r += w * std::cos(ts[i] * x);
          out[i] = r;
        },
        e);
    return out;
  }
  const GridDensity& g = sigma.grid();
  return kernels::cos_transform_sweep(grid_masses(g), g.lo(), g.cell_width(), ts, e);
}

double mixing_diagnostic(const SigmaMeasure& sigma, double t_horizon, std::size_t intervals,
                         std::optional<kernels::Exec> exec) {
  if (!(t_horizon > 0.0)) throw ConfigError("mixing_diagnostic: T must be positive");
  if (intervals % 2 != 0) ++intervals;
  std::vector<double> ts(intervals + 1);
  const double h = t_horizon / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) ts[i] = static_cast<double>(i) * h;
  auto r = covariance_sweep(sigma, ts, exec);
  for (double& v : r) v *= v;
  return kernels::simpson(r, 0.0, t_horizon) / t_horizon;
}

double atomic_mixing_limit(const SigmaMeasure& sigma) {
  if (!sigma.is_atomic()) throw ConfigError("atomic_mixing_limit: sigma must be atomic");
  double limit = 0.0;
  for (const auto& [x, w] : sigma.atoms().atoms()) {
    if (x > 0.0)
      limit += 2.0 * w * w;  // cos^2 averages 1/2 and the symmetric pair doubles the amplitude
    else if (x == 0.0)
      limit += w * w;
  }
  return limit;
}

namespace {

struct Mode {
  double x;
  double w;  // positive-half weight; doubled inside the amplitude
};

struct Quantization {
  std::vector<Mode> modes;
  double zero_weight = 0.0;  // full weight of an atom at 0
  double max_bin_width = 0.0;
};

// Equal-mass binning of the positive half of sigma; bin positions are the
// mass centroids, computed exactly for the piecewise-constant density.
Quantization quantize(const SigmaMeasure& sigma, int mode_count) {
  Quantization q;
  if (sigma.is_atomic()) {
    for (const auto& [x, w] : sigma.atoms().atoms()) {
      if (x == 0.0) q.zero_weight = w;
      if (x > 0.0) q.modes.push_back({x, w});
    }
    return q;
  }
  if (mode_count < 16) throw ConfigError("sample_process: need M >= 16 modes");
  const GridDensity& g = sigma.grid();
  const std::size_t n = g.cells();
  const double h = g.cell_width();
  const std::size_t first_pos = n / 2;  // symmetric window, even count: cells split at 0
  double half_mass = 0.0;
  for (std::size_t i = first_pos; i < n; ++i) half_mass += g.value(i) * h;
  if (half_mass <= 0.0) {
    q.zero_weight = g.mass();  // degenerate: all mass in the center cells
    return q;
  }
  const double target = half_mass / static_cast<double>(mode_count);
  std::size_t i = first_pos;
  double x = g.cell_left(i);  // sweep position inside the half
  for (int b = 0; b < mode_count; ++b) {
    const bool last = (b == mode_count - 1);
    double need = target;
    double acc = 0.0, acc_x = 0.0;
    double sup_lo = 0.0, sup_hi = 0.0;  // support actually consumed (zero-density gaps ignored)
    bool touched = false;
    while (i < n && (last || need > 0.0)) {
      const double cr = g.cell_left(i) + h;
      const double v = g.value(i);
      const double piece = v * (cr - x);
      double x_next;
      if (last || piece <= need) {
        acc += piece;
        acc_x += v * 0.5 * (cr * cr - x * x);
        need -= piece;
        x_next = cr;
        ++i;
      } else {
        const double dx = need / v;
        acc += need;
        acc_x += v * 0.5 * ((x + dx) * (x + dx) - x * x);
        x_next = x + dx;
        need = 0.0;
      }
      if (v > 0.0) {
        if (!touched) sup_lo = x, touched = true;
        sup_hi = x_next;
      }
      x = x_next;
    }
    if (acc > 0.0) {
      q.modes.push_back({acc_x / acc, acc});
      if (touched) q.max_bin_width = std::max(q.max_bin_width, sup_hi - sup_lo);
    }
  }
  return q;
}

std::vector<double> sample_values(const Quantization& q, const std::vector<double>& times,
                                  std::uint64_t seed) {
  rng::Engine eng(seed);
  std::vector<double> vals(times.size(), 0.0);
  if (q.zero_weight > 0.0) {
    const double amp = std::sqrt(q.zero_weight) * eng.normal();
    for (double& v : vals) v += amp;
  }
  for (const auto& m : q.modes) {
    const double xi = eng.normal();
    const double eta = eng.normal();
    const double amp = std::sqrt(2.0 * m.w);
    for (std::size_t k = 0; k < times.size(); ++k)
      vals[k] += amp * (xi * std::cos(m.x * times[k]) + eta * std::sin(m.x * times[k]));
  }
  return vals;
}

}  // namespace

ProcessSample sample_process(const SigmaMeasure& sigma, const std::vector<double>& times,
                             int mode_count, std::uint64_t seed) {
  if (!std::is_sorted(times.begin(), times.end()))
    throw ConfigError("sample_process: times must be increasing");
  const Quantization q = quantize(sigma, mode_count);
  double t_max = 0.0;
  for (const double t : times) t_max = std::max(t_max, std::fabs(t));
  if (q.max_bin_width * t_max > 2.0)
    throw NumericGuardError("sample_process: spectral quantization too coarse for the time horizon");
  ProcessSample out;
  out.times = times;
  out.values = sample_values(q, times, seed);
  out.mode_count = static_cast<int>(q.modes.size());
  out.seed = seed;
  return out;
}

std::vector<double> process_covariance_mc(const SigmaMeasure& sigma,
                                          const std::vector<double>& lags, int mode_count,
                                          std::size_t trials, std::uint64_t seed,
                                          std::optional<kernels::Exec> exec) {
  const auto e = exec.value_or(kernels::default_exec());
  const Quantization q = quantize(sigma, mode_count);
  std::vector<double> times;
  times.push_back(0.0);
  for (const double l : lags) times.push_back(l);
  // Per-trial products X(0) X(lag), reduced serially afterwards.
  std::vector<double> products(trials * lags.size());
  kernels::parallel_for(
      trials,
      [&](std::size_t trial) {
        const auto vals = sample_values(q, times, rng::derive_seed(seed, trial));
        for (std::size_t k = 0; k < lags.size(); ++k)
          products[trial * lags.size() + k] = vals[0] * vals[k + 1];
      },
      e);
  std::vector<double> cov(lags.size(), 0.0);
  for (std::size_t trial = 0; trial < trials; ++trial)
    for (std::size_t k = 0; k < lags.size(); ++k) cov[k] += products[trial * lags.size() + k];
  for (double& c : cov) c /= static_cast<double>(trials);
  return cov;
}

SelfSimilarityAffinity spectral_selfsim_test(const SigmaMeasure& sigma, double s, int p_max,
                                             std::optional<kernels::Exec> exec) {
  if (!(s > 0.0))
    throw ConfigError("spectral_selfsim_test: s must be positive (sigma is symmetric)");
  SelfSimilarityAffinity out{};
  if (sigma.is_atomic()) {
    const auto& a = sigma.atoms();
    out.affinity_sigma = hellinger_affinity(a, pushforward(a, MapKind::Scale, s)) / a.mass();
    const GridDensity raster = sigma.rasterize(4.0 * std::max(1.0, s), 1 << 12);
    const SigmaMeasure rastered = SigmaMeasure::from_grid(raster);
    const auto ex = exp_prime(rastered, p_max, exec);
    const auto scaled_exp = pushforward(ex.sum, MapKind::Scale, s);
    out.affinity_exp = hellinger_affinity_normalized(
        ex.sum, resample(scaled_exp, ex.sum.lo(), ex.sum.hi(), ex.sum.cells()));
    return out;
  }
  const GridDensity& g = sigma.grid();
  const GridDensity gs = pushforward(g, MapKind::Scale, s);
  out.affinity_sigma =
      hellinger_affinity_normalized(g, resample(gs, g.lo(), g.hi(), g.cells()));
  const auto ex = exp_prime(sigma, p_max, exec);
  const auto exps = pushforward(ex.sum, MapKind::Scale, s);
  out.affinity_exp = hellinger_affinity_normalized(
      ex.sum, resample(exps, ex.sum.lo(), ex.sum.hi(), ex.sum.cells()));
  return out;
}

}  // namespace specflow
