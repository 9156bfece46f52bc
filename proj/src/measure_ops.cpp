#include "specflow/measure_ops.hpp"

#include <algorithm>
#include <cmath>

namespace specflow {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> cell_masses(const GridDensity& g) {
  std::vector<double> m(g.cells());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = g.value(i) * g.cell_width();
  return m;
}

GridDensity from_masses(Domain d, double lo, double hi, std::vector<double> masses) {
  const double h = (hi - lo) / static_cast<double>(masses.size());
  for (double& v : masses) v /= h;
  return GridDensity(d, lo, hi, std::move(masses));
}

}  // namespace

GridDensity convolve(const GridDensity& f, const GridDensity& g,
                     std::optional<kernels::Exec> exec_opt) {
  const auto exec = exec_opt.value_or(kernels::default_exec());
  if (f.domain() != g.domain())
    throw NumericGuardError("convolve: domain kind mismatch");

  if (f.domain() == Domain::CircleUnit) {
    if (f.cells() != g.cells())
      throw NumericGuardError("convolve: circle grids must have equal grid_count");
    std::vector<double> out(f.cells());
    const auto ma = cell_masses(f), mb = cell_masses(g);
    kernels::convolve_masses_circular(ma, mb, out, exec);
    return from_masses(Domain::CircleUnit, 0.0, 1.0, std::move(out));
  }

  if (std::fabs(f.cell_width() - g.cell_width()) >
      1e-12 * std::max(f.cell_width(), g.cell_width()))
    throw NumericGuardError("convolve: line grids must have equal cell width");

  const auto ma = cell_masses(f), mb = cell_masses(g);
  std::vector<double> raw(ma.size() + mb.size());
  const bool sym = f.is_symmetric() && g.is_symmetric();
  if (sym)
    kernels::convolve_masses_linear_symmetric(ma, mb, raw, exec);
  else
    kernels::convolve_masses_linear(ma, mb, raw, exec);

  // Minkowski window, then symmetric zero-padding up to a power of two.
  const double h = f.cell_width();
  const std::size_t n_padded = next_pow2(raw.size());
  const std::size_t pad = n_padded - raw.size();
  const std::size_t pad_left = pad / 2;
  std::vector<double> padded(n_padded, 0.0);
  std::copy(raw.begin(), raw.end(), padded.begin() + pad_left);
  const double lo = (f.lo() + g.lo()) - static_cast<double>(pad_left) * h;
  const double hi = lo + static_cast<double>(n_padded) * h;
  return from_masses(f.domain(), lo, hi, std::move(padded));
}

GridDensity pushforward(const GridDensity& m, MapKind kind, double s) {
  switch (kind) {
    case MapKind::Scale: {
      if (s == 0.0) throw NumericGuardError("pushforward: scale by 0");
      if (m.domain() == Domain::CircleUnit)
        throw NumericGuardError("pushforward: scale undefined on the circle");
      if (m.domain() == Domain::PosRealsLog) {
        // Multiplication by s > 0 is translation by log s in the log chart.
        if (s <= 0.0)
          throw NumericGuardError("pushforward: scale on pos-reals requires s > 0");
        const double shift = std::log(s);
        return GridDensity(m.domain(), m.lo() + shift, m.hi() + shift, m.values());
      }
      std::vector<double> v(m.cells());
      const double inv = 1.0 / std::fabs(s);
      if (s > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value(i) * inv;
        return GridDensity(m.domain(), s * m.lo(), s * m.hi(), std::move(v));
      }
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value(m.cells() - 1 - i) * inv;
      return GridDensity(m.domain(), s * m.hi(), s * m.lo(), std::move(v));
    }
    case MapKind::Negate: {
      if (m.domain() == Domain::CircleUnit) {
        // Cell [i h, (i+1) h) maps onto cell n-1-i under theta -> -theta mod 1.
        std::vector<double> v(m.cells());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value(m.cells() - 1 - i);
        return GridDensity(Domain::CircleUnit, 0.0, 1.0, std::move(v));
      }
      return pushforward(m, MapKind::Scale, -1.0);
    }
    case MapKind::Exp: {
      if (m.domain() != Domain::RealLine)
        throw NumericGuardError("pushforward: exp maps real-line to pos-reals");
      // theta(t) = e^t; in log coordinates this is the identity relabel.
      return GridDensity(Domain::PosRealsLog, m.lo(), m.hi(), m.values());
    }
    case MapKind::Mod1: {
      if (m.domain() != Domain::RealLine)
        throw NumericGuardError("pushforward: mod1 maps real-line to the circle");
      const double h = m.cell_width();
      const double per_unit = 1.0 / h;
      const auto n_unit = static_cast<std::size_t>(std::llround(per_unit));
      if (std::fabs(per_unit - static_cast<double>(n_unit)) > 1e-9 || n_unit == 0)
        throw NumericGuardError("pushforward: cell width does not tile the unit circle");
      const double lo_cells = m.lo() / h;
      const auto lo_idx = static_cast<long long>(std::llround(lo_cells));
      if (std::fabs(lo_cells - static_cast<double>(lo_idx)) > 1e-9)
        throw NumericGuardError("pushforward: window not aligned with the integer lattice");
      std::vector<double> v(n_unit, 0.0);
      for (std::size_t i = 0; i < m.cells(); ++i) {
        const long long k = (lo_idx + static_cast<long long>(i)) %
                            static_cast<long long>(n_unit);
        v[(k + n_unit) % n_unit] += m.value(i);
      }
      return GridDensity(Domain::CircleUnit, 0.0, 1.0, std::move(v));
    }
  }
  throw std::logic_error("pushforward: unreachable");
}

AtomicMeasure pushforward(const AtomicMeasure& m, MapKind kind, double s) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(m.size());
  switch (kind) {
    case MapKind::Scale:
      if (s == 0.0) throw NumericGuardError("pushforward: scale by 0");
      for (const auto& [p, w] : m.atoms()) atoms.emplace_back(s * p, w);
      break;
    case MapKind::Negate:
      for (const auto& [p, w] : m.atoms()) atoms.emplace_back(-p, w);
      break;
    case MapKind::Exp:
      for (const auto& [p, w] : m.atoms()) atoms.emplace_back(std::exp(p), w);
      break;
    case MapKind::Mod1:
      for (const auto& [p, w] : m.atoms()) atoms.emplace_back(p - std::floor(p), w);
      break;
  }
  return AtomicMeasure(std::move(atoms));
}

std::complex<double> transform_eval(const GridDensity& m, double t_or_n) {
  const auto masses = [&] {
    std::vector<double> v(m.cells());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value(i) * m.cell_width();
    return v;
  }();
  if (m.domain() == Domain::CircleUnit) {
    const auto n = static_cast<long long>(std::llround(t_or_n));
    if (t_or_n != static_cast<double>(n))
      throw NumericGuardError("transform_eval: circle transform takes an integer frequency");
    // rho^(n) = int e^{-2 pi i n theta} dm — one libm-path sweep argument.
    const double t = -2.0 * M_PI * static_cast<double>(n);
    const double ts[1] = {t};
    const auto out =
        kernels::char_function_sweep(masses, m.lo(), m.cell_width(), ts,
                                     kernels::Exec::Serial, /*use_recurrence=*/false);
    return out[0];
  }
  const double ts[1] = {t_or_n};
  const auto out = kernels::char_function_sweep(masses, m.lo(), m.cell_width(), ts,
                                                kernels::Exec::Serial,
                                                /*use_recurrence=*/false);
  return out[0];
}

std::complex<double> transform_eval(const AtomicMeasure& m, double t) {
  std::complex<double> acc(0.0, 0.0);
  for (const auto& [p, w] : m.atoms()) acc += w * std::complex<double>(std::cos(t * p), std::sin(t * p));
  return acc;
}

namespace {

double affinity_core(const GridDensity& f, const GridDensity& g) {
  if (!f.same_grid(g)) throw NumericGuardError("hellinger_affinity: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.cells(); ++i) s += std::sqrt(f.value(i) * g.value(i));
  return std::min(1.0, s * f.cell_width());
}

}  // namespace

double hellinger_affinity(const GridDensity& f, const GridDensity& g, double mass_tol) {
  if (std::fabs(f.mass() - 1.0) > mass_tol || std::fabs(g.mass() - 1.0) > mass_tol)
    throw NumericGuardError("hellinger_affinity: inputs must be probability-normalized");
  return affinity_core(f, g);
}

double hellinger_affinity_normalized(const GridDensity& f, const GridDensity& g) {
  if (f.mass() <= 0.0 || g.mass() <= 0.0)
    throw NumericGuardError("hellinger_affinity: zero-mass input");
  return affinity_core(scaled(f, 1.0 / f.mass()), scaled(g, 1.0 / g.mass()));
}

double hellinger_affinity(const AtomicMeasure& f, const AtomicMeasure& g) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < f.size() && j < g.size()) {
    if (f.position(i) == g.position(j)) {
      s += std::sqrt(f.weight(i) * g.weight(j));
      ++i, ++j;
    } else if (f.position(i) < g.position(j)) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

GridDensity symmetrize(const GridDensity& m) {
  if (m.domain() == Domain::CircleUnit)
    throw NumericGuardError("symmetrize: defined on line charts only");
  GridDensity base = m;
  if (m.lo() != -m.hi()) {
    // One-sided windows with an endpoint at 0 extend to the symmetric hull.
    if (m.lo() == 0.0)
      base = embed(m, -m.hi(), m.hi(), 2 * m.cells());
    else if (m.hi() == 0.0)
      base = embed(m, m.lo(), -m.lo(), 2 * m.cells());
    else
      throw NumericGuardError("symmetrize: window not symmetric and not anchored at 0");
  }
  const std::size_t n = base.cells();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 0.5 * (base.value(i) + base.value(n - 1 - i));
  return GridDensity(base.domain(), base.lo(), base.hi(), std::move(v));
}

}  // namespace specflow
