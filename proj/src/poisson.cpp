#include "specflow/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "specflow/measure_ops.hpp"
#include "specflow/stats.hpp"

namespace specflow {

void FlowWindow::validate() const {
  if (!(s_lo > 0.0) || !(s_hi > s_lo)) throw ConfigError("window: need 0 < s_lo < s_hi");
  if (!(y_hi >= y_lo)) throw ConfigError("window: need y_lo <= y_hi");
  if (!(circle_len > 0.0)) throw ConfigError("window: need L > 0");
}

bool SubWindow::disjoint(const SubWindow& other) const {
  const bool s_ov = s_lo < other.s_hi && other.s_lo < s_hi;
  const bool y_ov = y_lo < other.y_hi && other.y_lo < y_hi;
  const bool z_ov = z_lo < other.z_hi && other.z_lo < z_hi;
  return !(s_ov && y_ov && z_ov);
}

bool SubWindow::contains(double s, double y, double z) const {
  return s >= s_lo && s < s_hi && y >= y_lo && y < y_hi && z >= z_lo && z < z_hi;
}

// --- Kappa -------------------------------------------------------------------

Kappa Kappa::lognormal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kappa lognormal: sigma must be positive");
  Kappa k;
  k.kind_ = Kind::Lognormal;
  k.mu_ = mu;
  k.sg_ = sigma;
  return k;
}

Kappa Kappa::uniform(double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw ConfigError("kappa uniform: need 0 < a < b");
  Kappa k;
  k.kind_ = Kind::Uniform;
  k.a_ = a;
  k.b_ = b;
  return k;
}

Kappa Kappa::haar(double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw ConfigError("kappa haar: need 0 < a < b");
  Kappa k;
  k.kind_ = Kind::Haar;
  k.a_ = a;
  k.b_ = b;
  return k;
}

Kappa Kappa::from_grid(GridDensity g) {
  if (g.domain() != Domain::PosRealsLog)
    throw ConfigError("kappa grid: density must live on pos-reals-log");
  Kappa k;
  k.kind_ = Kind::Grid;
  k.grid_ = std::move(g);
  return k;
}

Kappa Kappa::from_atoms(AtomicMeasure a) {
  for (const auto& [p, w] : a.atoms())
    if (!(p > 0.0)) throw ConfigError("kappa atoms: positions must be positive");
  Kappa k;
  k.kind_ = Kind::Atoms;
  k.atoms_ = std::move(a);
  return k;
}

const GridDensity& Kappa::grid() const {
  if (kind_ != Kind::Grid) throw ConfigError("kappa: not grid-backed");
  return *grid_;
}

std::pair<double, double> Kappa::default_log_window(double log_h) const {
  const double pad = std::max(4.0, std::fabs(log_h) + 1.0);
  switch (kind_) {
    case Kind::Lognormal: return {mu_ - 16.0 * sg_ - pad, mu_ + 16.0 * sg_ + pad};
    case Kind::Uniform:
    case Kind::Haar: return {std::log(a_) - pad - 1.0, std::log(b_) + pad + 1.0};
    case Kind::Grid: return {grid_->lo(), grid_->hi()};
    case Kind::Atoms: break;
  }
  throw ConfigError("default_log_window: not defined for atomic kappa");
}

double Kappa::mass() const {
  switch (kind_) {
    case Kind::Lognormal: return 1.0;
    case Kind::Uniform: return 1.0;
    case Kind::Haar: return std::log(b_ / a_);
    case Kind::Grid: return grid_->mass();
    case Kind::Atoms: return atoms_->mass();
  }
  return 0.0;
}

double Kappa::mass_in(double s_lo, double s_hi) const {
  if (!(s_lo > 0.0) || !(s_hi > s_lo)) return 0.0;
  switch (kind_) {
    case Kind::Lognormal:
      return stats::normal_cdf((std::log(s_hi) - mu_) / sg_) -
             stats::normal_cdf((std::log(s_lo) - mu_) / sg_);
    case Kind::Uniform: {
      const double ov = std::min(b_, s_hi) - std::max(a_, s_lo);
      return ov > 0.0 ? ov / (b_ - a_) : 0.0;
    }
    case Kind::Haar: {
      const double lo = std::max(a_, s_lo), hi = std::min(b_, s_hi);
      return hi > lo ? std::log(hi / lo) : 0.0;
    }
    case Kind::Grid: return grid_->mass_in(std::log(s_lo), std::log(s_hi));
    case Kind::Atoms: {
      double m = 0.0;
      for (const auto& [p, w] : atoms_->atoms())
        if (p >= s_lo && p < s_hi) m += w;
      return m;
    }
  }
  return 0.0;
}

std::function<double(rng::Engine&)> Kappa::sampler(double s_lo, double s_hi) const {
  if (mass_in(s_lo, s_hi) <= 0.0)
    throw NumericGuardError("kappa sampler: zero mass in the requested range");
  switch (kind_) {
    case Kind::Lognormal: {
      const double p_lo = stats::normal_cdf((std::log(s_lo) - mu_) / sg_);
      const double p_hi = stats::normal_cdf((std::log(s_hi) - mu_) / sg_);
      const double mu = mu_, sg = sg_;
      return [p_lo, p_hi, mu, sg](rng::Engine& eng) {
        const double u = p_lo + (p_hi - p_lo) * eng.uniform01();
        return std::exp(mu + sg * stats::normal_quantile(std::min(std::max(u, 1e-300), 1.0 - 1e-16)));
      };
    }
    case Kind::Uniform: {
      const double lo = std::max(a_, s_lo), hi = std::min(b_, s_hi);
      return [lo, hi](rng::Engine& eng) { return eng.uniform(lo, hi); };
    }
    case Kind::Haar: {
      const double lo = std::log(std::max(a_, s_lo)), hi = std::log(std::min(b_, s_hi));
      return [lo, hi](rng::Engine& eng) { return std::exp(eng.uniform(lo, hi)); };
    }
    case Kind::Grid: {
      // Restricted cellwise CDF in the log chart, inverted by binary search.
      const GridDensity& g = *grid_;
      const double t_lo = std::log(s_lo), t_hi = std::log(s_hi);
      std::vector<double> cum(g.cells() + 1, 0.0);
      std::vector<double> left(g.cells(), 0.0);
      for (std::size_t i = 0; i < g.cells(); ++i) {
        const double a = std::max(g.cell_left(i), t_lo);
        const double b = std::min(g.cell_left(i) + g.cell_width(), t_hi);
        cum[i + 1] = cum[i] + (b > a ? g.value(i) * (b - a) : 0.0);
        left[i] = a;
      }
      const double total = cum.back();
      auto grid_copy = std::make_shared<const GridDensity>(g);
      return [cum = std::move(cum), left = std::move(left), total, t_hi,
              grid_copy](rng::Engine& eng) {
        const double target = eng.uniform01() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), target);
        std::size_t i = std::max<std::ptrdiff_t>(1, it - cum.begin()) - 1;
        if (i >= grid_copy->cells()) i = grid_copy->cells() - 1;
        const double v = grid_copy->value(i);
        // within <= restricted cell width by construction; clamp for rounding
        const double within = v > 0.0 ? (target - cum[i]) / v : 0.0;
        return std::exp(std::min(left[i] + within, t_hi));
      };
    }
    case Kind::Atoms: {
      std::vector<double> cum;
      std::vector<double> pos;
      double total = 0.0;
      for (const auto& [p, w] : atoms_->atoms()) {
        if (p >= s_lo && p < s_hi) {
          total += w;
          cum.push_back(total);
          pos.push_back(p);
        }
      }
      return [cum = std::move(cum), pos = std::move(pos), total](rng::Engine& eng) {
        const double target = eng.uniform01() * total;
        const auto it = std::lower_bound(cum.begin(), cum.end(), target);
        const std::size_t i = std::min<std::size_t>(it - cum.begin(), pos.size() - 1);
        return pos[i];
      };
    }
  }
  throw std::logic_error("kappa sampler: unreachable");
}

double Kappa::density_ratio(double s, double h) const {
  if (!(s > 0.0) || !(h > 0.0))
    throw ConfigError("density_ratio: s and h must be positive");
  const double t = std::log(s);
  const double l = std::log(h);
  switch (kind_) {
    case Kind::Lognormal: {
      const double u0 = (t - mu_) / sg_, u1 = (t + l - mu_) / sg_;
      return std::exp(0.5 * (u1 * u1 - u0 * u0));
    }
    case Kind::Uniform: {
      const double la = std::log(a_), lb = std::log(b_);
      if (t < la || t >= lb || t + l < la || t + l >= lb)
        throw NumericGuardError("density_ratio: point leaves the uniform support (h outside H(kappa))");
      // log-chart density e^t / (b-a)
      return std::exp(-l);
    }
    case Kind::Haar: {
      const double la = std::log(a_), lb = std::log(b_);
      if (t < la || t >= lb || t + l < la || t + l >= lb)
        throw NumericGuardError("density_ratio: point leaves the haar window");
      return 1.0;
    }
    case Kind::Grid: {
      const GridDensity& g = *grid_;
      const auto cell_value = [&](double x) {
        if (x < g.lo() || x >= g.hi())
          throw NumericGuardError("density_ratio: point outside kappa grid window");
        auto i = static_cast<std::size_t>((x - g.lo()) / g.cell_width());
        if (i >= g.cells()) i = g.cells() - 1;
        return g.value(i);
      };
      double peak = 0.0;
      for (std::size_t i = 0; i < g.cells(); ++i) peak = std::max(peak, g.value(i));
      const double num = cell_value(t), den = cell_value(t + l);
      if (num <= 1e-12 * peak || den <= 1e-12 * peak)
        throw NumericGuardError("density_ratio: vanishing density (h outside H(kappa)?)");
      return num / den;
    }
    case Kind::Atoms:
      if (h == 1.0) return 1.0;
      throw NumericGuardError("density_ratio: undefined for atomic kappa with h != 1");
  }
  throw std::logic_error("density_ratio: unreachable");
}

GridDensity Kappa::rasterize_log(double lo, double hi, std::size_t cells) const {
  const double h = (hi - lo) / static_cast<double>(cells);
  std::vector<double> v(cells, 0.0);
  switch (kind_) {
    case Kind::Lognormal:
      for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + static_cast<double>(i) * h;
        const double m = stats::normal_cdf((a + h - mu_) / sg_) - stats::normal_cdf((a - mu_) / sg_);
        v[i] = m / h;
      }
      break;
    case Kind::Uniform:
      for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + static_cast<double>(i) * h;
        const double ea = std::exp(std::max(a, std::log(a_)));
        const double eb = std::exp(std::min(a + h, std::log(b_)));
        v[i] = eb > ea ? (eb - ea) / (b_ - a_) / h : 0.0;
      }
      break;
    case Kind::Haar:
      for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + static_cast<double>(i) * h;
        const double ov = std::min(a + h, std::log(b_)) - std::max(a, std::log(a_));
        v[i] = ov > 0.0 ? ov / h : 0.0;
      }
      break;
    case Kind::Grid: {
      double lost = 0.0;
      GridDensity r = resample(*grid_, lo, hi, cells, &lost);
      if (lost > 1e-9 * std::max(1.0, grid_->mass()))
        throw NumericGuardError("kappa rasterize: window truncates the grid measure");
      return r;
    }
    case Kind::Atoms: {
      std::vector<std::pair<double, double>> log_atoms;
      for (const auto& [p, w] : atoms_->atoms()) log_atoms.emplace_back(std::log(p), w);
      return GridDensity::from_atoms(Domain::PosRealsLog, lo, hi, cells, log_atoms);
    }
  }
  return GridDensity(Domain::PosRealsLog, lo, hi, std::move(v));
}

std::vector<std::pair<double, double>> Kappa::quadrature_nodes() const {
  std::vector<std::pair<double, double>> nodes;
  if (kind_ == Kind::Grid) {
    const GridDensity& g = *grid_;
    for (std::size_t i = 0; i < g.cells(); ++i) {
      const double m = g.value(i) * g.cell_width();
      if (m > 0.0) nodes.emplace_back(std::exp(g.cell_center(i)), m);
    }
    return nodes;
  }
  if (kind_ == Kind::Atoms) return atoms_->atoms();
  throw ConfigError("quadrature_nodes: rasterize parametric kappa first (rasterize_log)");
}

std::string Kappa::describe() const {
  switch (kind_) {
    case Kind::Lognormal: return "lognormal(mu=" + std::to_string(mu_) + ",sigma=" + std::to_string(sg_) + ")";
    case Kind::Uniform: return "uniform[" + std::to_string(a_) + "," + std::to_string(b_) + "]";
    case Kind::Haar: return "haar-improper[" + std::to_string(a_) + "," + std::to_string(b_) + "]";
    case Kind::Grid: return "grid(log-chart)";
    case Kind::Atoms: return "atoms(" + std::to_string(atoms_->size()) + ")";
  }
  return "?";
}

// --- sampling and flow maps --------------------------------------------------

double window_intensity(const ProductFlowSpec& spec) {
  spec.window.validate();
  return spec.kappa.mass_in(spec.window.s_lo, spec.window.s_hi) * spec.window.y_extent() *
         spec.window.circle_len;
}

PointConfig sample_poisson(const ProductFlowSpec& spec, std::uint64_t seed) {
  spec.window.validate();
  const double mu = window_intensity(spec);
  PointConfig cfg{{}, spec.window};
  if (mu == 0.0) return cfg;
  if (mu > 700.0) throw NumericGuardError("sample_poisson: window intensity too large");
  rng::Engine eng(seed);
  const int n = eng.poisson(mu);
  const auto draw_s = spec.kappa.sampler(spec.window.s_lo, spec.window.s_hi);
  cfg.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Point p;
    p.s = draw_s(eng);
    p.y = spec.window.degenerate_y() ? spec.window.y_lo
                                     : eng.uniform(spec.window.y_lo, spec.window.y_hi);
    p.z = eng.uniform(0.0, spec.window.circle_len);
    cfg.points.push_back(p);
  }
  return cfg;
}

namespace {

inline double mod_circle(double z, double len) {
  double r = std::fmod(z, len);
  if (r < 0.0) r += len;
  return r;
}

}  // namespace

PointConfig apply_flow(const ProductFlowSpec& spec, double t, const PointConfig& cfg) {
  PointConfig out = cfg;
  const double len = spec.window.circle_len;
  for (auto& p : out.points) p.z = mod_circle(p.z + p.s * t, len);
  return out;
}

PointConfig q_transform(const ProductFlowSpec& spec, double h, const PointConfig& cfg) {
  if (!(h > 0.0)) throw ConfigError("q_transform: h must be positive");
  PointConfig out = cfg;
  for (auto& p : out.points) {
    const double ratio = spec.kappa.density_ratio(p.s, h);
    if (spec.window.degenerate_y() && ratio != 1.0)
      throw NumericGuardError("q_transform: degenerate y-window needs ratio == 1 (haar kappa)");
    p.s = h * p.s;
    p.y = p.y * ratio;
  }
  return out;
}

std::size_t count_in(const PointConfig& cfg, const SubWindow& k) {
  std::size_t n = 0;
  for (const auto& p : cfg.points)
    if (k.contains(p.s, p.y, p.z)) ++n;
  return n;
}

// --- cylinder verification ----------------------------------------------------

namespace {

double sub_window_intensity(const ProductFlowSpec& spec, const SubWindow& k) {
  const auto& w = spec.window;
  const double s_lo = std::max(k.s_lo, w.s_lo), s_hi = std::min(k.s_hi, w.s_hi);
  const double z_len = std::min(k.z_hi, w.circle_len) - std::max(k.z_lo, 0.0);
  double y_len = 1.0;
  if (!w.degenerate_y()) {
    y_len = std::min(k.y_hi, w.y_hi) - std::max(k.y_lo, w.y_lo);
    if (y_len <= 0.0) return 0.0;
  }
  if (z_len <= 0.0 || s_hi <= s_lo) return 0.0;
  return spec.kappa.mass_in(s_lo, s_hi) * y_len * z_len;
}

}  // namespace

std::vector<BandRow> cylinder_verify(const ProductFlowSpec& spec, const SubWindow& k,
                                     const SubWindow& k_prime, const CylinderOptions& opt,
                                     std::uint64_t seed, std::optional<kernels::Exec> exec) {
  spec.window.validate();
  if (!k.disjoint(k_prime))
    throw ConfigError("cylinder_verify: K and K' must be disjoint");
  if (opt.trials < 10000) throw ConfigError("cylinder_verify: need N >= 10^4 trials");
  const auto e = exec.value_or(kernels::default_exec());

  const double mu_k = sub_window_intensity(spec, k);
  const double mu_kp = sub_window_intensity(spec, k_prime);
  const std::size_t n_trials = opt.trials;
  const std::size_t n_flow = opt.flow_times.size();
  const SubWindow k_inv{k.s_lo, k.s_hi, k.y_lo, k.y_hi, 0.0, spec.window.circle_len};
  const double mu_inv = sub_window_intensity(spec, k_inv);

  std::vector<int> cnt_k(n_trials), cnt_kp(n_trials);
  std::vector<int> cnt_flow(n_trials * n_flow);
  kernels::parallel_for(
      n_trials,
      [&](std::size_t trial) {
        const auto cfg = sample_poisson(spec, rng::derive_seed(seed, trial));
        cnt_k[trial] = static_cast<int>(count_in(cfg, k));
        cnt_kp[trial] = static_cast<int>(count_in(cfg, k_prime));
        for (std::size_t ti = 0; ti < n_flow; ++ti) {
          const auto moved = apply_flow(spec, opt.flow_times[ti], cfg);
          cnt_flow[trial * n_flow + ti] = static_cast<int>(count_in(moved, k_inv));
        }
      },
      e);

  const int j_max = opt.j_max;
  const std::size_t buckets = static_cast<std::size_t>(j_max) + 2;  // j_max+1 = overflow
  std::vector<double> hist_k(buckets, 0.0), hist_kp(buckets, 0.0);
  std::vector<double> joint(buckets * buckets, 0.0);
  std::vector<std::vector<double>> hist_flow(n_flow, std::vector<double>(buckets, 0.0));
  double sum_k = 0.0, sum_kp = 0.0, sum_prod = 0.0;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    const int a = std::min(cnt_k[trial], j_max + 1);
    const int b = std::min(cnt_kp[trial], j_max + 1);
    hist_k[a] += 1.0;
    hist_kp[b] += 1.0;
    joint[a * buckets + b] += 1.0;
    sum_k += cnt_k[trial];
    sum_kp += cnt_kp[trial];
    sum_prod += static_cast<double>(cnt_k[trial]) * cnt_kp[trial];
    for (std::size_t ti = 0; ti < n_flow; ++ti)
      hist_flow[ti][std::min(cnt_flow[trial * n_flow + ti], j_max + 1)] += 1.0;
  }

  std::vector<BandRow> rows;
  const double dn = static_cast<double>(n_trials);
  const auto c1_rows = [&](const char* name, double mu, const std::vector<double>& hist) {
    for (int j = 0; j <= j_max; ++j) {
      const double p = stats::poisson_pmf(j, mu);
      const double band = 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / dn);
      const double emp = hist[j] / dn;
      rows.push_back({name, "j=" + std::to_string(j) + ";mu=" + std::to_string(mu), p, emp,
                      p - band, p + band, std::fabs(emp - p) <= band});
    }
  };
  c1_rows("c1_K", mu_k, hist_k);
  c1_rows("c1_Kprime", mu_kp, hist_kp);

  // (c2): counts on disjoint windows are independent — covariance band.
  const double mean_k = sum_k / dn, mean_kp = sum_kp / dn;
  const double cov = sum_prod / dn - mean_k * mean_kp;
  const double cov_band = 3.0 / std::sqrt(dn);
  rows.push_back({"c2_covariance", "", 0.0, cov, -cov_band, cov_band, std::fabs(cov) <= cov_band});

  // (c2): joint law equals the product of marginals — independence chi-square.
  {
    // Lump categories whose marginal expectation is small.
    const double min_marginal = 25.0;
    auto cap = [&](const std::vector<double>& hist) {
      std::size_t c = buckets;
      while (c > 1 && hist[c - 1] < min_marginal) --c;
      return c;
    };
    const std::size_t rk = cap(hist_k), rkp = cap(hist_kp);
    std::vector<double> row_m(rk, 0.0), col_m(rkp, 0.0);
    std::vector<double> table(rk * rkp, 0.0);
    for (std::size_t a = 0; a < buckets; ++a)
      for (std::size_t b = 0; b < buckets; ++b) {
        const std::size_t ra = std::min(a, rk - 1), cb = std::min(b, rkp - 1);
        table[ra * rkp + cb] += joint[a * buckets + b];
      }
    for (std::size_t a = 0; a < rk; ++a)
      for (std::size_t b = 0; b < rkp; ++b) {
        row_m[a] += table[a * rkp + b];
        col_m[b] += table[a * rkp + b];
      }
    double stat = 0.0;
    for (std::size_t a = 0; a < rk; ++a)
      for (std::size_t b = 0; b < rkp; ++b) {
        const double expct = row_m[a] * col_m[b] / dn;
        if (expct > 0.0) {
          const double d = table[a * rkp + b] - expct;
          stat += d * d / expct;
        }
      }
    const int dof = static_cast<int>((rk - 1) * (rkp - 1));
    const double p = stats::chi2_pvalue(stat, std::max(dof, 1));
    rows.push_back({"c2_joint_chi2", "dof=" + std::to_string(dof), opt.chi2_p_threshold, p,
                    opt.chi2_p_threshold, 1.0, p >= opt.chi2_p_threshold});
  }

  // Poisson tail: far beyond 10*mu the law leaves no points at all.
  {
    int j_tail = static_cast<int>(std::ceil(10.0 * std::max(mu_k, 1.0)));
    double tail = 1.0;
    for (int j = 0; j < j_tail; ++j) tail -= stats::poisson_pmf(j, mu_k);
    while (tail > 1e-8 && j_tail < 200) {
      tail -= stats::poisson_pmf(j_tail, mu_k);
      ++j_tail;
    }
    double emp = 0.0;
    for (std::size_t trial = 0; trial < n_trials; ++trial)
      if (cnt_k[trial] >= j_tail) emp += 1.0;
    emp /= dn;
    rows.push_back({"poisson_tail", "j_tail=" + std::to_string(j_tail),
                    std::max(tail, 0.0), emp, 0.0, 1e-8, emp <= 1e-8 && tail <= 1e-8});
  }

  // Flow invariance: the count law in the full-circle cylinder over K is the
  // same after T_t.
  for (std::size_t ti = 0; ti < n_flow; ++ti) {
    std::vector<double> expected(buckets, 0.0);
    double head = 0.0;
    for (int j = 0; j <= j_max; ++j) {
      expected[j] = dn * stats::poisson_pmf(j, mu_inv);
      head += expected[j];
    }
    expected[buckets - 1] = std::max(dn - head, 0.0);
    const auto gof = stats::chi2_goodness_of_fit(hist_flow[ti], expected);
    rows.push_back({"flow_invariant_counts", "t=" + std::to_string(opt.flow_times[ti]),
                    opt.chi2_p_threshold, gof.pvalue, opt.chi2_p_threshold, 1.0,
                    gof.pvalue >= opt.chi2_p_threshold});
  }
  return rows;
}

// --- kappa quasi-invariance -----------------------------------------------------

KappaGroupResult kappa_group_test(const Kappa& kappa, double h, const KappaGroupOptions& opt) {
  if (!(h > 0.0)) throw ConfigError("kappa_group_test: h must be positive");
  const double l = std::log(h);

  if (kappa.is_atomic()) {
    const auto nodes = kappa.quadrature_nodes();
    std::vector<std::pair<double, double>> shifted;
    for (const auto& [p, w] : nodes) shifted.emplace_back(p * h, w);
    double affinity = 0.0, matched_a = 0.0, matched_b = 0.0;
    for (const auto& [p, w] : nodes) {
      for (const auto& [q, w2] : shifted) {
        if (std::fabs(p - q) <= 1e-12 * std::max(1.0, std::fabs(p))) {
          affinity += std::sqrt(w * w2);
          matched_a += w;
          matched_b += w2;
        }
      }
    }
    const double total = kappa.mass();
    const bool support = (total - matched_a) <= opt.support_mass_tol * total &&
                         (total - matched_b) <= opt.support_mass_tol * total;
    affinity /= total;
    return {affinity, support, support && affinity > opt.affinity_threshold};
  }

  const GridDensity base = [&] {
    if (kappa.is_grid()) return kappa.grid();
    double lo = opt.log_window_lo, hi = opt.log_window_hi;
    if (lo == 0.0 && hi == 0.0) std::tie(lo, hi) = kappa.default_log_window(l);
    return kappa.rasterize_log(lo, hi, opt.cells);
  }();

  const GridDensity shifted_raw = pushforward(base, MapKind::Scale, h);
  double lost = 0.0;
  const GridDensity shifted = resample(shifted_raw, base.lo(), base.hi(), base.cells(), &lost);

  double affinity = 0.0;
  double mism_base = 0.0, mism_shift = lost;  // shifted mass that left the window has no partner
  const double hcw = base.cell_width();
  for (std::size_t i = 0; i < base.cells(); ++i) {
    const double f = base.value(i), g = shifted.value(i);
    affinity += std::sqrt(f * g) * hcw;
    if (g <= opt.support_density_eps) mism_base += f * hcw;
    if (f <= opt.support_density_eps) mism_shift += g * hcw;
  }
  const double mass = std::max(base.mass(), 1e-300);
  affinity = std::min(1.0, affinity / mass);  // masses equal up to truncation
  const bool support = mism_base <= opt.support_mass_tol * mass &&
                       mism_shift <= opt.support_mass_tol * mass;
  return {affinity, support, support && affinity > opt.affinity_threshold};
}

// --- conjugacy / measure preservation -------------------------------------------

namespace {

inline double circ_dist(double a, double b, double len) {
  double d = std::fabs(a - b);
  d = std::fmod(d, len);
  return std::min(d, len - d);
}

}  // namespace

ConjugacyResult conjugacy_check(const ProductFlowSpec& spec, const ConjugacyOptions& opt,
                                std::uint64_t seed) {
  spec.window.validate();
  const auto draw_s = spec.kappa.sampler(spec.window.s_lo, spec.window.s_hi);
  ConjugacyResult res{0.0, 0.0};
  const double len = spec.window.circle_len;
  for (std::size_t i = 0; i < opt.triples; ++i) {
    rng::Engine eng(rng::derive_seed(seed, i));
    Point x;
    x.s = draw_s(eng);
    x.y = spec.window.degenerate_y() ? spec.window.y_lo
                                     : eng.uniform(spec.window.y_lo, spec.window.y_hi);
    x.z = eng.uniform(0.0, len);
    const double t = eng.uniform(-opt.t_max, opt.t_max);
    const double h = std::exp(eng.uniform(-opt.log_h_max, opt.log_h_max));

    PointConfig cfg{{x}, spec.window};
    const auto chained = q_transform(spec, 1.0 / h, apply_flow(spec, t, q_transform(spec, h, cfg)));
    const auto direct = apply_flow(spec, h * t, cfg);
    const Point& a = chained.points[0];
    const Point& b = direct.points[0];
    res.max_conjugacy_err = std::max({res.max_conjugacy_err, std::fabs(a.s - b.s),
                                      std::fabs(a.y - b.y), circ_dist(a.z, b.z, len)});

    const auto round_trip = q_transform(spec, 1.0 / h, q_transform(spec, h, cfg));
    const Point& r = round_trip.points[0];
    res.max_inverse_err = std::max({res.max_inverse_err, std::fabs(r.s - x.s),
                                    std::fabs(r.y - x.y), circ_dist(r.z, x.z, len)});
  }
  return res;
}

QPreservationResult q_preservation_check(const ProductFlowSpec& spec,
                                         const QPreservationOptions& opt, std::uint64_t seed) {
  spec.window.validate();
  if (spec.window.degenerate_y())
    throw ConfigError("q_preservation_check: needs a real y window");
  const auto draw_s = spec.kappa.sampler(spec.window.s_lo, spec.window.s_hi);
  rng::Engine eng(seed);
  const std::size_t nb = opt.bins_t * opt.bins_y;
  std::vector<double> hist_orig(nb, 0.0), hist_mapped(nb, 0.0);
  const double dt = (opt.t_hi - opt.t_lo) / static_cast<double>(opt.bins_t);
  const double dy = (opt.y_hi - opt.y_lo) / static_cast<double>(opt.bins_y);
  const auto bin_of = [&](double t, double y) -> std::ptrdiff_t {
    if (t < opt.t_lo || t >= opt.t_hi || y < opt.y_lo || y >= opt.y_hi) return -1;
    const auto bt = static_cast<std::size_t>((t - opt.t_lo) / dt);
    const auto by = static_cast<std::size_t>((y - opt.y_lo) / dy);
    return static_cast<std::ptrdiff_t>(std::min(bt, opt.bins_t - 1) * opt.bins_y +
                                       std::min(by, opt.bins_y - 1));
  };
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const double s = draw_s(eng);
    const double y = eng.uniform(spec.window.y_lo, spec.window.y_hi);
    const double t = std::log(s);
    if (const auto b = bin_of(t, y); b >= 0) hist_orig[b] += 1.0;
    const double ratio = spec.kappa.density_ratio(s, opt.h);
    const double t2 = std::log(opt.h * s);
    const double y2 = y * ratio;
    if (const auto b = bin_of(t2, y2); b >= 0) hist_mapped[b] += 1.0;
  }
  const auto r = stats::chi2_two_sample(hist_orig, hist_mapped);
  return {r.statistic, r.dof, r.pvalue};
}

// --- tau ---------------------------------------------------------------------------

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::pair<double, double>> orthogonality_probes_for(
    const std::vector<std::pair<double, double>>& nodes, std::size_t count) {
  std::vector<std::pair<double, double>> out;
  if (nodes.empty() || count == 0) return out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t idx = (i * (nodes.size() - 1)) / std::max<std::size_t>(1, count - 1);
    out.push_back(nodes[std::min(idx, nodes.size() - 1)]);
  }
  return out;
}

}  // namespace

TauResult tau_spectral(const GridDensity& sigma_v, const Kappa& kappa, const TauOptions& opt) {
  if (sigma_v.domain() != Domain::RealLine)
    throw ConfigError("tau_spectral: sigma_V must live on the real line");
  const auto nodes = kappa.quadrature_nodes();
  if (nodes.empty()) throw ConfigError("tau_spectral: kappa has no quadrature nodes");

  const bool auto_target = opt.target_cells == 0;
  // kappa = delta_1: tau is sigma_V itself, grid-exact.
  if (auto_target && nodes.size() == 1 && nodes[0].first == 1.0) {
    TauResult res{scaled(sigma_v, nodes[0].second), sigma_v.mass() * kappa.mass(), {}};
    return res;
  }

  double lo, hi;
  std::size_t cells;
  if (auto_target) {
    lo = 1e300;
    hi = -1e300;
    for (const auto& [s, w] : nodes) {
      lo = std::min({lo, s * sigma_v.lo(), s * sigma_v.hi()});
      hi = std::max({hi, s * sigma_v.lo(), s * sigma_v.hi()});
    }
    cells = next_pow2(static_cast<std::size_t>((hi - lo) / sigma_v.cell_width()) + 1);
    if (cells > (1u << 22))
      throw NumericGuardError("tau_spectral: automatic target grid too large");
    hi = lo + static_cast<double>(cells) * sigma_v.cell_width();
  } else {
    lo = opt.target_lo;
    hi = opt.target_hi;
    cells = opt.target_cells;
  }

  std::vector<double> masses(cells, 0.0);
  const double h = (hi - lo) / static_cast<double>(cells);
  for (const auto& [s, w] : nodes) {
    const GridDensity pushed = pushforward(sigma_v, MapKind::Scale, s);
    accumulate_resampled(pushed, w, masses, lo, h, nullptr);
  }
  for (double& m : masses) m /= h;
  TauResult res{GridDensity(Domain::RealLine, lo, hi, std::move(masses)),
                sigma_v.mass() * kappa.mass(), {}};

  for (const auto& [s, w] : orthogonality_probes_for(nodes, opt.orthogonality_probes)) {
    if (s == 1.0) continue;
    const GridDensity pushed = pushforward(sigma_v, MapKind::Scale, s);
    const GridDensity back = resample(pushed, sigma_v.lo(), sigma_v.hi(), sigma_v.cells());
    res.orthogonality.emplace_back(s, hellinger_affinity_normalized(sigma_v, back));
  }
  return res;
}

TauResult tau_spectral(const AtomicMeasure& sigma_v, const Kappa& kappa, const TauOptions& opt) {
  const auto nodes = kappa.quadrature_nodes();
  if (nodes.empty()) throw ConfigError("tau_spectral: kappa has no quadrature nodes");

  double p_lo = 1e300, p_hi = -1e300;
  for (const auto& [s, w] : nodes)
    for (const auto& [x, wx] : sigma_v.atoms()) {
      p_lo = std::min(p_lo, s * x);
      p_hi = std::max(p_hi, s * x);
    }
  const double pad = 0.05 * std::max(1.0, p_hi - p_lo);
  double lo = opt.target_cells == 0 ? p_lo - pad : opt.target_lo;
  double hi = opt.target_cells == 0 ? p_hi + pad : opt.target_hi;
  std::size_t cells = opt.target_cells == 0 ? 4096 : opt.target_cells;

  std::vector<double> masses(cells, 0.0);
  const double h = (hi - lo) / static_cast<double>(cells);
  double lost = 0.0;
  for (const auto& [s, w] : nodes)
    for (const auto& [x, wx] : sigma_v.atoms()) {
      const double pos = s * x;
      if (pos < lo || pos >= hi) {
        lost += w * wx;
        continue;
      }
      auto j = static_cast<std::size_t>((pos - lo) / h);
      if (j >= cells) j = cells - 1;
      masses[j] += w * wx;
    }
  if (lost > 1e-9 * sigma_v.mass() * kappa.mass())
    throw NumericGuardError("tau_spectral: target window truncates the image measure");
  for (double& m : masses) m /= h;
  TauResult res{GridDensity(Domain::RealLine, lo, hi, std::move(masses)),
                sigma_v.mass() * kappa.mass(), {}};

  for (const auto& [s, w] : orthogonality_probes_for(nodes, opt.orthogonality_probes)) {
    if (s == 1.0) continue;
    const auto pushed = pushforward(sigma_v, MapKind::Scale, s);
    res.orthogonality.emplace_back(
        s, hellinger_affinity(sigma_v, pushed) / std::max(sigma_v.mass(), 1e-300));
  }
  return res;
}

}  // namespace specflow
