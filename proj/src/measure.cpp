#include "specflow/measure.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace specflow {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Density values produced by exact nonnegative arithmetic can pick up
// negative rounding dust; anything below this (relative to the peak) is
// clamped, larger negatives signal a real problem upstream.
constexpr double kNegativeDust = 1e-12;

}  // namespace

std::string domain_name(Domain d) {
  switch (d) {
    case Domain::CircleUnit: return "circle-unit";
    case Domain::RealLine: return "real-line";
    case Domain::PosRealsLog: return "pos-reals-log";
  }
  return "?";
}

Domain domain_from_name(const std::string& name) {
  if (name == "circle-unit") return Domain::CircleUnit;
  if (name == "real-line") return Domain::RealLine;
  if (name == "pos-reals-log") return Domain::PosRealsLog;
  throw ConfigError("unknown domain kind: " + name);
}

GridDensity::GridDensity(Domain domain, double lo, double hi, std::vector<double> values)
    : domain_(domain), lo_(lo), hi_(hi), values_(std::move(values)) {
  if (domain_ == Domain::CircleUnit && (lo_ != 0.0 || hi_ != 1.0))
    throw ConfigError("circle densities use the fixed window [0,1)");
  if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_))
    throw ConfigError("grid window must be a finite interval");
  if (!is_power_of_two(values_.size()))
    throw ConfigError("grid_count must be a power of two");
  width_ = (hi_ - lo_) / static_cast<double>(values_.size());

  double peak = 0.0;
  for (double v : values_) peak = std::max(peak, std::fabs(v));
  const double floor = -kNegativeDust * std::max(1.0, peak);
  double m = 0.0;
  for (double& v : values_) {
    if (v < 0.0) {
      if (v < floor)
        throw NumericGuardError("grid density has negative values beyond tolerance");
      v = 0.0;
    }
    m += v;
  }
  mass_ = m * width_;
}

GridDensity GridDensity::zeros(Domain domain, double lo, double hi, std::size_t cells) {
  return GridDensity(domain, lo, hi, std::vector<double>(cells, 0.0));
}

GridDensity GridDensity::from_atoms(Domain domain, double lo, double hi, std::size_t cells,
                                    const std::vector<std::pair<double, double>>& atoms) {
  std::vector<double> v(cells, 0.0);
  const double h = (hi - lo) / static_cast<double>(cells);
  for (const auto& [pos, w] : atoms) {
    if (pos < lo || pos >= hi)
      throw NumericGuardError("atom outside rasterization window");
    auto idx = static_cast<std::size_t>((pos - lo) / h);
    if (idx >= cells) idx = cells - 1;
    v[idx] += w / h;
  }
  return GridDensity(domain, lo, hi, std::move(v));
}

double GridDensity::mass_in(double a, double b) const {
  a = std::max(a, lo_);
  b = std::min(b, hi_);
  if (!(b > a)) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double cl = cell_left(i), cr = cl + width_;
    const double ov = std::min(b, cr) - std::max(a, cl);
    if (ov > 0.0) m += values_[i] * ov;
  }
  return m;
}

bool GridDensity::is_symmetric() const {
  if (domain_ == Domain::CircleUnit) return false;
  if (lo_ != -hi_) return false;
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n / 2; ++i)
    if (values_[i] != values_[n - 1 - i]) return false;
  return true;
}

bool GridDensity::same_grid(const GridDensity& other) const {
  return domain_ == other.domain_ && lo_ == other.lo_ && hi_ == other.hi_ &&
         values_.size() == other.values_.size();
}

// Distributes the mass of source cell [a,b) with density v onto the target
// cell-mass array (window lo + k*h). Mass outside the target window is
// accumulated into *lost.
static void spread_mass(double a, double b, double v, std::vector<double>& target_masses,
                        double lo, double h, double* lost) {
  if (!(b > a) || v == 0.0) return;
  const double hi = lo + h * static_cast<double>(target_masses.size());
  if (b <= lo || a >= hi) {
    if (lost) *lost += v * (b - a);
    return;
  }
  if (a < lo) {
    if (lost) *lost += v * (lo - a);
    a = lo;
  }
  if (b > hi) {
    if (lost) *lost += v * (b - hi);
    b = hi;
  }
  auto j = static_cast<std::size_t>((a - lo) / h);
  if (j >= target_masses.size()) j = target_masses.size() - 1;
  while (a < b) {
    const double cell_right = lo + h * static_cast<double>(j + 1);
    const double top = std::min(b, cell_right);
    if (top > a) target_masses[j] += v * (top - a);
    a = top;
    if (a >= b) break;
    if (j + 1 >= target_masses.size()) {
      if (lost) *lost += v * (b - a);
      break;
    }
    ++j;
  }
}

void accumulate_resampled(const GridDensity& g, double weight, std::vector<double>& target_masses,
                          double lo, double h, double* lost) {
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const double a = g.cell_left(i);
    spread_mass(a, a + g.cell_width(), weight * g.value(i), target_masses, lo, h, lost);
  }
}

GridDensity resample(const GridDensity& g, double lo, double hi, std::size_t cells,
                     double* lost_mass) {
  std::vector<double> masses(cells, 0.0);
  const double h = (hi - lo) / static_cast<double>(cells);
  double lost = 0.0;
  accumulate_resampled(g, 1.0, masses, lo, h, &lost);
  for (double& m : masses) m /= h;
  GridDensity r(g.domain(), lo, hi, std::move(masses));
  if (lost_mass) *lost_mass = lost;
  return r;
}

GridDensity embed(const GridDensity& g, double lo, double hi, std::size_t cells) {
  const double h = (hi - lo) / static_cast<double>(cells);
  const double rel = (g.lo() - lo) / h;
  const auto offset = static_cast<std::ptrdiff_t>(std::llround(rel));
  if (std::fabs(rel - static_cast<double>(offset)) > 1e-9 ||
      std::fabs(g.cell_width() - h) > 1e-15 * std::fabs(h))
    throw NumericGuardError("embed: target grid not aligned with source grid");
  if (offset < 0 || static_cast<std::size_t>(offset) + g.cells() > cells)
    throw NumericGuardError("embed: target window does not cover source");
  std::vector<double> out(cells, 0.0);
  for (std::size_t i = 0; i < g.cells(); ++i) out[offset + i] = g.value(i);
  return GridDensity(g.domain(), lo, hi, std::move(out));
}

GridDensity add_scaled(const GridDensity& a, const GridDensity& b, double w) {
  if (!a.same_grid(b)) throw NumericGuardError("add_scaled: grid mismatch");
  std::vector<double> out(a.cells());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value(i) + w * b.value(i);
  return GridDensity(a.domain(), a.lo(), a.hi(), std::move(out));
}

GridDensity scaled(const GridDensity& g, double c) {
  std::vector<double> out(g.cells());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * g.value(i);
  return GridDensity(g.domain(), g.lo(), g.hi(), std::move(out));
}

AtomicMeasure::AtomicMeasure(std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [p, w] : atoms_) {
    if (!(w > 0.0)) throw ConfigError("atom weights must be positive");
    if (!std::isfinite(p) || !std::isfinite(w)) throw ConfigError("atom entries must be finite");
    if (!merged.empty() && merged.back().first == p)
      merged.back().second += w;
    else
      merged.emplace_back(p, w);
  }
  atoms_ = std::move(merged);
  mass_ = 0.0;
  for (const auto& [p, w] : atoms_) mass_ += w;
}

void to_json(nlohmann::json& j, const GridDensity& g) {
  j = nlohmann::json{{"domain", domain_name(g.domain())},
                     {"window", {g.lo(), g.hi()}},
                     {"grid_count", g.cells()},
                     {"values", g.values()}};
}

GridDensity grid_density_from_json(const nlohmann::json& j) {
  try {
    const Domain d = domain_from_name(j.at("domain").get<std::string>());
    const auto w = j.at("window").get<std::vector<double>>();
    const auto n = j.at("grid_count").get<std::size_t>();
    auto values = j.at("values").get<std::vector<double>>();
    if (w.size() != 2) throw ConfigError("window must be [lo, hi]");
    if (values.size() != n) throw ConfigError("values length must equal grid_count");
    return GridDensity(d, w[0], w[1], std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad grid density JSON: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const AtomicMeasure& m) {
  auto arr = nlohmann::json::array();
  for (const auto& [p, w] : m.atoms()) arr.push_back({p, w});
  j = nlohmann::json{{"atoms", std::move(arr)}};
}

AtomicMeasure atomic_measure_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& e : j.at("atoms")) atoms.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    return AtomicMeasure(std::move(atoms));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad atomic measure JSON: ") + e.what());
  }
}

}  // namespace specflow
