#include "specflow/commands.hpp"

#include <chrono>
#include <cmath>

#include "specflow/gaussian.hpp"
#include "specflow/lift.hpp"
#include "specflow/measure_ops.hpp"
#include "specflow/poisson.hpp"
#include "specflow/riesz.hpp"
#include "specflow/stats.hpp"

namespace specflow {

namespace {

const std::vector<std::string> kCommands = {
    "riesz-coeff",  "riesz-hgroup",     "riesz-criteria", "lift-sigma",
    "gauss-exp",    "gauss-cov",        "gauss-sim",      "gauss-mix",
    "gauss-selfsim", "poisson-sample",  "poisson-verify", "poisson-conjugacy",
    "kappa-group",  "spectral-tau"};

ReportRow band_row(std::string name, std::string param, double theo, double emp, double tol) {
  return {std::move(name), std::move(param), theo, emp, theo - tol, theo + tol,
          std::fabs(emp - theo) <= tol};
}

ReportRow upper_row(std::string name, std::string param, double theo, double emp, double hi) {
  return {std::move(name), std::move(param), theo, emp, 0.0, hi, emp <= hi};
}

ReportRow info_row(std::string name, std::string param, double value) {
  return {std::move(name), std::move(param), value, value, value, value, true};
}

double get_or(const nlohmann::json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

std::int64_t get_or_int(const nlohmann::json& j, const char* key, std::int64_t dflt) {
  return j.contains(key) ? j.at(key).get<std::int64_t>() : dflt;
}

// --- shared parsers -----------------------------------------------------------

RieszSpec parse_riesz(const nlohmann::json& params) {
  if (params.contains("source")) return riesz_spec_from_json(params.at("source"));
  if (params.contains("spec")) return riesz_spec_from_json(params.at("spec"));
  if (params.contains("family") || params.contains("n")) return riesz_spec_from_json(params);
  throw ConfigError("missing riesz spec");
}

// theta entries: number (exact dyadic), "p/q" string, or {"num","den"}.
struct ThetaEntry {
  ExactFrac frac;
  std::string label;
  bool small_rational;  // stability check applies when the denominator is small
};

ThetaEntry parse_theta(const nlohmann::json& e) {
  if (e.is_number()) {
    const double v = e.get<double>();
    auto f = ExactFrac::from_double(v);
    const bool small = f.den() <= 1000000;
    return {f, format_double(v), small};
  }
  if (e.is_string()) {
    const std::string s = e.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw ConfigError("theta string must be p/q");
    const long long p = std::stoll(s.substr(0, slash));
    const long long q = std::stoll(s.substr(slash + 1));
    return {ExactFrac(p, q), s, true};
  }
  if (e.is_object())
    return {ExactFrac(e.at("num").get<long long>(), e.at("den").get<long long>()),
            e.dump(), true};
  throw ConfigError("bad theta entry");
}

// sigma: {"kind":"atoms"|"grid"|"gaussian"|"uniform", ...}
SigmaMeasure parse_sigma(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atoms") return SigmaMeasure::from_atoms(atomic_measure_from_json(j));
  if (kind == "grid") return SigmaMeasure::from_grid(grid_density_from_json(j.at("grid")));
  if (kind == "two-atom")
    return SigmaMeasure::two_atoms(get_or(j, "x", 1.0), get_or(j, "weight", 0.5));
  const double halfwidth = get_or(j, "halfwidth", 8.0);
  const auto cells = static_cast<std::size_t>(get_or_int(j, "cells", 4096));
  if (kind == "gaussian") {
    const double sd = get_or(j, "std", 1.0);
    std::vector<double> v(cells);
    const double h = 2.0 * halfwidth / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      const double x = -halfwidth + (static_cast<double>(i) + 0.5) * h;
      v[i] = std::exp(-0.5 * x * x / (sd * sd)) / (sd * std::sqrt(2.0 * M_PI));
    }
    auto g = GridDensity(Domain::RealLine, -halfwidth, halfwidth, std::move(v));
    return SigmaMeasure::from_grid(scaled(g, 1.0 / g.mass()));
  }
  if (kind == "uniform") {
    const double a = get_or(j, "support_halfwidth", 1.0);
    std::vector<double> v(cells, 0.0);
    const double h = 2.0 * halfwidth / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      const double l = -halfwidth + static_cast<double>(i) * h;
      const double ov = std::min(l + h, a) - std::max(l, -a);
      if (ov > 0.0) v[i] = 0.5 / a * (ov / h);
    }
    return SigmaMeasure::from_grid(GridDensity(Domain::RealLine, -halfwidth, halfwidth, std::move(v)));
  }
  throw ConfigError("unknown sigma kind: " + kind);
}

Kappa parse_kappa(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lognormal") return Kappa::lognormal(get_or(j, "mu", 0.0), get_or(j, "sigma", 1.0));
  if (kind == "uniform") return Kappa::uniform(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "haar") return Kappa::haar(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "grid") return Kappa::from_grid(grid_density_from_json(j.at("grid")));
  if (kind == "atoms") return Kappa::from_atoms(atomic_measure_from_json(j));
  throw ConfigError("unknown kappa kind: " + kind);
}

FlowWindow parse_window(const nlohmann::json& j) {
  FlowWindow w{};
  const auto s = j.at("s").get<std::vector<double>>();
  const auto y = j.at("y").get<std::vector<double>>();
  if (s.size() != 2 || y.size() != 2) throw ConfigError("window: s and y must be [lo,hi]");
  w.s_lo = s[0];
  w.s_hi = s[1];
  w.y_lo = y[0];
  w.y_hi = y[1];
  w.circle_len = get_or(j, "L", 1.0);
  w.validate();
  return w;
}

SubWindow parse_subwindow(const nlohmann::json& j, double circle_len) {
  SubWindow k{};
  const auto s = j.at("s").get<std::vector<double>>();
  const auto y = j.at("y").get<std::vector<double>>();
  k.s_lo = s[0];
  k.s_hi = s[1];
  k.y_lo = y[0];
  k.y_hi = y[1];
  if (j.contains("z")) {
    const auto z = j.at("z").get<std::vector<double>>();
    k.z_lo = z[0];
    k.z_hi = z[1];
  } else {
    k.z_lo = 0.0;
    k.z_hi = circle_len;
  }
  return k;
}

// --- command handlers -----------------------------------------------------------

void run_riesz_coeff(const ExperimentConfig& cfg, Report& rep) {
  const RieszSpec spec = parse_riesz(cfg.params);
  std::vector<long long> ms;
  for (const auto& e : cfg.params.at("m")) ms.push_back(e.get<long long>());
  const bool dual_route = spec.size() <= 12;
  TrigPoly pp;
  if (dual_route) pp = partial_product(spec, spec.size());
  for (const long long m : ms) {
    const auto formula = fourier_coefficient(spec, BigInt(m));
    const std::string param = "m=" + std::to_string(m);
    if (dual_route) {
      const auto readout = pp.coeff(BigInt(m));
      rep.rows.push_back(band_row("fourier_re", param, readout.real(), formula.real(), 1e-12));
      rep.rows.push_back(band_row("fourier_im", param, readout.imag(), formula.imag(), 1e-12));
    } else {
      rep.rows.push_back(info_row("fourier_re", param, formula.real()));
      rep.rows.push_back(info_row("fourier_im", param, formula.imag()));
    }
  }
}

void run_riesz_hgroup(const ExperimentConfig& cfg, Report& rep) {
  const RieszSpec spec = parse_riesz(cfg.params);
  const int J = static_cast<int>(get_or_int(cfg.params, "J", spec.size()));
  if (J < 1 || J > spec.size()) throw ConfigError("riesz-hgroup: J out of range");
  for (const auto& e : cfg.params.at("theta")) {
    const ThetaEntry th = parse_theta(e);
    const auto terms = h_membership_terms(spec, th.frac, J);
    double s_j = 0.0, s_half = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      s_j += terms[i];
      if (i < terms.size() / 2) s_half += terms[i];
    }
    const auto verdict = classify_series(terms, {});
    const char* v = verdict == MembershipVerdict::MemberEvidence ? "member-evidence"
                                                                 : "divergence-evidence";
    if (th.small_rational) {
      // Rational theta = p/q: terms vanish for j >= q under the factorial
      // family; report the stabilized sum and check the tail is exactly 0.
      const auto q = th.frac.den().convert_to<long long>();
      bool tail_zero = true;
      double stable = 0.0;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        if (static_cast<long long>(i) + 1 >= q && terms[i] != 0.0) tail_zero = false;
        if (static_cast<long long>(i) + 1 < q) stable += terms[i];
      }
      const bool applies = spec.is_factorial() && q <= J;
      rep.rows.push_back({"h_series", "theta=" + th.label + ";verdict=" + v,
                          applies ? stable : s_j, s_j,
                          applies ? stable - 1e-12 : s_j, applies ? stable + 1e-12 : s_j,
                          applies ? (tail_zero && std::fabs(s_j - stable) <= 1e-12) : true});
    } else {
      rep.rows.push_back({"h_series", "theta=" + th.label + ";verdict=" + v, s_half, s_j,
                          s_half, kUnbounded, s_j >= s_half});
    }
  }
}

void run_riesz_criteria(const ExperimentConfig& cfg, Report& rep) {
  const RieszSpec spec = parse_riesz(cfg.params);
  const CriteriaSums c = criteria(spec);
  if (spec.is_factorial()) {
    const double target = M_PI * M_PI / 6.0 - 1.0;
    rep.rows.push_back(band_row("lacunary_sum_plus_tail", "J=" + std::to_string(spec.size()),
                                target, c.lacunary_sum + c.tail_bound,
                                spec.size() >= 10000 ? 1e-6 : 1e-2));
  } else {
    rep.rows.push_back(info_row("lacunary_sum", "", c.lacunary_sum));
  }
  rep.rows.push_back(info_row("weight_sum", "J=" + std::to_string(spec.size()), c.weight_sum));
  rep.rows.push_back(info_row("tail_bound", "", c.tail_bound));
}

void run_lift_sigma(const ExperimentConfig& cfg, Report& rep) {
  LiftSpec spec{parse_riesz(cfg.params), static_cast<int>(get_or_int(cfg.params, "K", 2)),
                static_cast<int>(get_or_int(cfg.params, "J", 4)),
                static_cast<std::size_t>(get_or_int(cfg.params, "cells_per_unit", 256))};
  const GridDensity lift = standard_lift(spec);
  rep.rows.push_back(band_row("lift_mass", "K=" + std::to_string(spec.tile_count_K),
                              spec.captured_mass(), lift.mass(), 1e-9));

  // mod-1 projection must be proportional to the circle density.
  const GridDensity circle =
      partial_product(spec.source, spec.partial_index_J).rasterize(spec.cells_per_unit);
  const GridDensity folded = pushforward(lift, MapKind::Mod1);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < circle.cells(); ++i) {
    const double expect = spec.captured_mass() * circle.value(i);
    max_dev = std::max(max_dev, std::fabs(folded.value(i) - expect) / std::max(1.0, expect));
  }
  rep.rows.push_back(upper_row("projection_ratio_dev", "", 0.0, max_dev, 1e-9));

  const SigmaMeasure sigma = build_sigma(lift);
  rep.rows.push_back(band_row("sigma_mass", "", lift.mass(), sigma.mass(), 1e-9));

  // The membership series depends only on the sequences (n_j, a_j), so the
  // factorial family extends past the raster order when more terms are asked
  // for.
  int J_series = static_cast<int>(get_or_int(cfg.params, "J_series", 40));
  RieszSpec series_spec = spec.source;
  if (spec.source.is_factorial() && J_series > spec.source.size())
    series_spec = RieszSpec::factorial(J_series);
  else
    J_series = std::min(J_series, spec.source.size());
  if (cfg.params.contains("s_values")) {
    for (const auto& e : cfg.params.at("s_values")) {
      MembershipReport r{};
      if (e.is_number()) {
        r = h_sigma_membership(series_spec, e.get<double>(), J_series);
      } else {
        const int sign = static_cast<int>(get_or_int(e, "sign", 1));
        const ThetaEntry th = parse_theta(e.at("log"));
        r = h_sigma_membership_exact(series_spec, sign, th.frac, J_series);
      }
      const char* v = r.verdict == MembershipVerdict::MemberEvidence ? "member-evidence"
                                                                     : "divergence-evidence";
      rep.rows.push_back(info_row(
          "h_sigma_membership",
          "s=" + format_double(r.s) + ";theta=" + format_double(r.theta) + ";verdict=" + v,
          r.series));
    }
  }
}

GridDensity sigma_as_grid(const SigmaMeasure& sigma, const nlohmann::json& params) {
  if (!sigma.is_atomic()) return sigma.grid();
  const double halfwidth = get_or(params, "raster_halfwidth", 8.0);
  const auto cells = static_cast<std::size_t>(get_or_int(params, "raster_cells", 4096));
  return sigma.rasterize(halfwidth, cells);
}

void run_gauss_exp(const ExperimentConfig& cfg, Report& rep) {
  const SigmaMeasure sigma_in = parse_sigma(cfg.params.at("sigma"));
  const SigmaMeasure sigma =
      sigma_in.is_atomic() ? SigmaMeasure::from_grid(sigma_as_grid(sigma_in, cfg.params))
                           : sigma_in;
  const int p_max = static_cast<int>(get_or_int(cfg.params, "P_max", 12));
  const SpectralExp ex = exp_prime(sigma, p_max);
  double expected = 0.0, f = 1.0;
  for (int p = 1; p <= p_max; ++p) {
    f *= static_cast<double>(p);
    expected += 1.0 / f;
  }
  rep.rows.push_back(band_row("exp_mass", "P_max=" + std::to_string(p_max), expected,
                              ex.sum.mass(), 1e-6));
  double defect = 0.0;
  for (std::size_t i = 0; i < ex.sum.cells(); ++i)
    defect = std::max(defect, std::fabs(ex.sum.value(i) - ex.sum.value(ex.sum.cells() - 1 - i)));
  rep.rows.push_back(upper_row("exp_symmetry_defect", "", 0.0, defect, 0.0));
  rep.rows.push_back(info_row("truncation_bound", "", ex.truncation_bound));
}

void run_gauss_cov(const ExperimentConfig& cfg, Report& rep) {
  const auto& sj = cfg.params.at("sigma");
  const SigmaMeasure sigma = parse_sigma(sj);
  const std::string kind = sj.at("kind").get<std::string>();
  std::vector<double> ts;
  for (const auto& e : cfg.params.at("t")) ts.push_back(e.get<double>());
  const auto r = covariance_sweep(sigma, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string param = "t=" + format_double(ts[i]);
    if (kind == "uniform") {
      const double a = get_or(sj, "support_halfwidth", 1.0);
      const double x = ts[i] * a;
      const double closed = x == 0.0 ? 1.0 : std::sin(x) / x;
      rep.rows.push_back(band_row("covariance", param, closed, r[i], 1e-8));
    } else if (kind == "atoms" || kind == "two-atom") {
      rep.rows.push_back(band_row("covariance", param, covariance(sigma, ts[i]), r[i], 1e-12));
    } else {
      rep.rows.push_back(info_row("covariance", param, r[i]));
    }
  }
}

void run_gauss_sim(const ExperimentConfig& cfg, Report& rep) {
  const SigmaMeasure sigma = parse_sigma(cfg.params.at("sigma"));
  std::vector<double> lags;
  for (const auto& e : cfg.params.at("lags")) lags.push_back(e.get<double>());
  const int modes = static_cast<int>(get_or_int(cfg.params, "modes", 256));
  const auto trials = static_cast<std::size_t>(get_or_int(cfg.params, "trials", 10000));
  const auto emp = process_covariance_mc(sigma, lags, modes, trials, cfg.seed);
  const double r0 = covariance(sigma, 0.0);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double r = covariance(sigma, lags[i]);
    const double band = 4.0 * std::sqrt((r0 * r0 + r * r) / static_cast<double>(trials));
    rep.rows.push_back({"process_covariance", "lag=" + format_double(lags[i]), r, emp[i],
                        r - band, r + band, std::fabs(emp[i] - r) <= band});
  }
}

void run_gauss_mix(const ExperimentConfig& cfg, Report& rep) {
  const SigmaMeasure sigma = parse_sigma(cfg.params.at("sigma"));
  const auto intervals = static_cast<std::size_t>(get_or_int(cfg.params, "intervals", 1 << 16));
  for (const auto& e : cfg.params.at("T")) {
    const double T = e.get<double>();
    const double v = mixing_diagnostic(sigma, T, intervals);
    if (sigma.is_atomic()) {
      const double limit = atomic_mixing_limit(sigma);
      rep.rows.push_back(band_row("mixing_time_average", "T=" + format_double(T), limit, v,
                                  1.0 / (2.0 * T) + 1e-6));
    } else {
      rep.rows.push_back(info_row("mixing_time_average", "T=" + format_double(T), v));
    }
  }
}

void run_gauss_selfsim(const ExperimentConfig& cfg, Report& rep) {
  const SigmaMeasure sigma = parse_sigma(cfg.params.at("sigma"));
  const int p_max = static_cast<int>(get_or_int(cfg.params, "P_max", 8));
  for (const auto& e : cfg.params.at("s")) {
    const double s = e.get<double>();
    const auto aff = spectral_selfsim_test(sigma, s, p_max);
    const std::string param = "s=" + format_double(s);
    if (s == 1.0) {
      rep.rows.push_back(band_row("affinity_sigma", param, 1.0, aff.affinity_sigma, 1e-9));
      rep.rows.push_back(band_row("affinity_exp", param, 1.0, aff.affinity_exp, 1e-9));
    } else {
      rep.rows.push_back(info_row("affinity_sigma", param, aff.affinity_sigma));
      rep.rows.push_back(info_row("affinity_exp", param, aff.affinity_exp));
    }
  }
}

void run_poisson_sample(const ExperimentConfig& cfg, Report& rep) {
  const ProductFlowSpec spec{parse_kappa(cfg.params.at("kappa")),
                             parse_window(cfg.params.at("window"))};
  const auto config = sample_poisson(spec, cfg.seed);
  const double mu = window_intensity(spec);
  rep.rows.push_back({"sample_count",
                      "kappa=" + spec.kappa.describe() +
                          (spec.kappa.improper() ? ";improper-kappa" : ""),
                      mu, static_cast<double>(config.points.size()), 0.0, kUnbounded, true});
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : config.points) pts.push_back({p.s, p.y, p.z});
  rep.artifacts["points"] = std::move(pts);
}

void run_poisson_verify(const ExperimentConfig& cfg, Report& rep) {
  if (cfg.params.contains("mu")) {
    // Shorthand: a window of total intensity mu, (c1) rows only.
    const double mu = cfg.params.at("mu").get<double>();
    const int j_max = static_cast<int>(get_or_int(cfg.params, "j_max", 8));
    const auto trials = static_cast<std::size_t>(get_or_int(cfg.params, "N", 100000));
    const ProductFlowSpec spec{Kappa::uniform(1.0, 2.0), FlowWindow{1.0, 2.0, 0.0, mu, 1.0}};
    std::vector<int> counts(trials);
    kernels::parallel_for(
        trials,
        [&](std::size_t i) {
          counts[i] =
              static_cast<int>(sample_poisson(spec, rng::derive_seed(cfg.seed, i)).points.size());
        },
        kernels::default_exec());
    std::vector<double> hist(static_cast<std::size_t>(j_max) + 1, 0.0);
    for (const int c : counts)
      if (c <= j_max) hist[c] += 1.0;
    const double dn = static_cast<double>(trials);
    for (int j = 0; j <= j_max; ++j) {
      const double p = stats::poisson_pmf(j, mu);
      const double band = 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / dn);
      rep.rows.push_back({"c1", "j=" + std::to_string(j) + ";mu=" + format_double(mu), p,
                          hist[j] / dn, p - band, p + band,
                          std::fabs(hist[j] / dn - p) <= band});
    }
    return;
  }
  const ProductFlowSpec spec{parse_kappa(cfg.params.at("kappa")),
                             parse_window(cfg.params.at("window"))};
  const SubWindow k = parse_subwindow(cfg.params.at("K"), spec.window.circle_len);
  const SubWindow kp = parse_subwindow(cfg.params.at("Kprime"), spec.window.circle_len);
  CylinderOptions opt;
  opt.j_max = static_cast<int>(get_or_int(cfg.params, "j_max", 8));
  opt.trials = static_cast<std::size_t>(get_or_int(cfg.params, "N", 100000));
  if (cfg.params.contains("t_values"))
    opt.flow_times = cfg.params.at("t_values").get<std::vector<double>>();
  auto rows = cylinder_verify(spec, k, kp, opt, cfg.seed);
  for (auto& r : rows)
    rep.rows.push_back({r.name, r.parameter, r.theoretical, r.empirical, r.band_lo, r.band_hi,
                        r.pass});
}

void run_poisson_conjugacy(const ExperimentConfig& cfg, Report& rep) {
  const ProductFlowSpec spec{parse_kappa(cfg.params.at("kappa")),
                             parse_window(cfg.params.at("window"))};
  ConjugacyOptions opt;
  opt.triples = static_cast<std::size_t>(get_or_int(cfg.params, "triples", 1000));
  opt.t_max = get_or(cfg.params, "t_max", 5.0);
  opt.log_h_max = get_or(cfg.params, "log_h_max", 1.0);
  const auto res = conjugacy_check(spec, opt, cfg.seed);
  rep.rows.push_back(upper_row("conjugacy_identity",
                               "triples=" + std::to_string(opt.triples), 0.0,
                               res.max_conjugacy_err, 1e-12));
  rep.rows.push_back(upper_row("q_inverse_identity", "", 0.0, res.max_inverse_err, 1e-10));

  const bool q_check = cfg.params.contains("q_check") ? cfg.params.at("q_check").get<bool>()
                                                      : !spec.window.degenerate_y();
  if (q_check) {
    QPreservationOptions qopt;
    qopt.h = get_or(cfg.params, "q_h", qopt.h);
    qopt.samples = static_cast<std::size_t>(get_or_int(cfg.params, "q_samples", 100000));
    const auto q = q_preservation_check(spec, qopt, cfg.seed + 1);
    rep.rows.push_back({"q_measure_preservation",
                        "h=" + format_double(qopt.h) + ";dof=" + std::to_string(q.dof), 1e-3,
                        q.pvalue, 1e-3, 1.0, q.pvalue >= 1e-3});
  }
}

void run_kappa_group(const ExperimentConfig& cfg, Report& rep) {
  const Kappa kappa = parse_kappa(cfg.params.at("kappa"));
  KappaGroupOptions opt;
  if (cfg.params.contains("log_window")) {
    const auto w = cfg.params.at("log_window").get<std::vector<double>>();
    opt.log_window_lo = w[0];
    opt.log_window_hi = w[1];
  }
  opt.cells = static_cast<std::size_t>(get_or_int(cfg.params, "cells", 8192));
  opt.affinity_threshold = get_or(cfg.params, "affinity_threshold", 1e-3);
  const std::string kind = cfg.params.at("kappa").at("kind").get<std::string>();
  for (const auto& e : cfg.params.at("h_values")) {
    const double h = e.get<double>();
    const auto r = kappa_group_test(kappa, h, opt);
    const std::string param = "h=" + format_double(h) +
                              ";support_match=" + (r.support_match ? "true" : "false") +
                              ";verdict=" + (r.member_evidence ? "member" : "not-member") +
                              (kappa.improper() ? ";improper-kappa" : "");
    if (kind == "lognormal") {
      const double sg = get_or(cfg.params.at("kappa"), "sigma", 1.0);
      const double l = std::log(h);
      const double closed = std::exp(-l * l / (8.0 * sg * sg));
      rep.rows.push_back(band_row("kappa_affinity", param, closed, r.affinity, 1e-4));
    } else {
      rep.rows.push_back(info_row("kappa_affinity", param, r.affinity));
    }
  }
}

void run_spectral_tau(const ExperimentConfig& cfg, Report& rep) {
  Kappa kappa = parse_kappa(cfg.params.at("kappa"));
  if (kappa.parametric()) {
    // Parametric kappa needs an explicit quadrature: rasterize in the log chart.
    const auto w = cfg.params.contains("s_grid_log_window")
                       ? cfg.params.at("s_grid_log_window").get<std::vector<double>>()
                       : std::vector<double>{kappa.default_log_window(0.0).first,
                                             kappa.default_log_window(0.0).second};
    const auto cells = static_cast<std::size_t>(get_or_int(cfg.params, "s_grid_cells", 2048));
    kappa = Kappa::from_grid(kappa.rasterize_log(w[0], w[1], cells));
  }
  TauOptions opt;
  if (cfg.params.contains("target")) {
    const auto& t = cfg.params.at("target");
    opt.target_lo = t.at("lo").get<double>();
    opt.target_hi = t.at("hi").get<double>();
    opt.target_cells = t.at("cells").get<std::size_t>();
  }
  const auto& sv = cfg.params.at("sigma_V");
  TauResult res = sv.contains("atoms")
                      ? tau_spectral(atomic_measure_from_json(sv), kappa, opt)
                      : tau_spectral(grid_density_from_json(sv), kappa, opt);
  rep.rows.push_back(band_row("tau_mass", "kappa=" + kappa.describe(), res.expected_mass,
                              res.tau.mass(), 1e-6));
  for (const auto& [s, aff] : res.orthogonality)
    rep.rows.push_back(info_row("sigma_s_affinity", "s=" + format_double(s), aff));
  nlohmann::json tau_json;
  to_json(tau_json, res.tau);
  rep.artifacts["tau"] = std::move(tau_json);
}

}  // namespace

const std::vector<std::string>& known_commands() { return kCommands; }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  bool known = false;
  for (const auto& k : kCommands) known = known || k == c.command;
  if (!known) throw ConfigError("unknown command: " + c.command);
  return c;
}

Report run(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.command = config.command;
  rep.seed = config.seed;
  rep.config_hash = fnv1a_hash(config.command + "\n" + config.params.dump() + "\n" +
                               std::to_string(config.seed));

  if (config.command == "riesz-coeff") run_riesz_coeff(config, rep);
  else if (config.command == "riesz-hgroup") run_riesz_hgroup(config, rep);
  else if (config.command == "riesz-criteria") run_riesz_criteria(config, rep);
  else if (config.command == "lift-sigma") run_lift_sigma(config, rep);
  else if (config.command == "gauss-exp") run_gauss_exp(config, rep);
  else if (config.command == "gauss-cov") run_gauss_cov(config, rep);
  else if (config.command == "gauss-sim") run_gauss_sim(config, rep);
  else if (config.command == "gauss-mix") run_gauss_mix(config, rep);
  else if (config.command == "gauss-selfsim") run_gauss_selfsim(config, rep);
  else if (config.command == "poisson-sample") run_poisson_sample(config, rep);
  else if (config.command == "poisson-verify") run_poisson_verify(config, rep);
  else if (config.command == "poisson-conjugacy") run_poisson_conjugacy(config, rep);
  else if (config.command == "kappa-group") run_kappa_group(config, rep);
  else if (config.command == "spectral-tau") run_spectral_tau(config, rep);
  else throw ConfigError("unknown command: " + config.command);

  rep.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace specflow
