#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "specflow/common.hpp"

namespace specflow {

// The three coordinate charts measures live on. Measures on the
// multiplicative positive reals are always stored in t = log s coordinates,
// so that multiplicative translation becomes additive translation.
enum class Domain { CircleUnit, RealLine, PosRealsLog };

std::string domain_name(Domain d);
Domain domain_from_name(const std::string& name);

// A nonnegative density sampled as piecewise-constant cell values on a
// uniform grid over an explicit window. Immutable after construction.
//
// Semantics: values[i] is the density (mass per unit coordinate) on the cell
// [lo + i*h, lo + (i+1)*h). The circle is fixed to the window [0,1).
class GridDensity {
 public:
  GridDensity(Domain domain, double lo, double hi, std::vector<double> values);

  static GridDensity zeros(Domain domain, double lo, double hi, std::size_t cells);

  // Rasterizes a list of point masses; each atom's weight goes entirely to
  // the cell containing it. Atoms outside the window are an error.
  static GridDensity from_atoms(Domain domain, double lo, double hi, std::size_t cells,
                                const std::vector<std::pair<double, double>>& atoms);

  Domain domain() const { return domain_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t cells() const { return values_.size(); }
  double cell_width() const { return width_; }
  double cell_left(std::size_t i) const { return lo_ + static_cast<double>(i) * width_; }
  double cell_center(std::size_t i) const { return lo_ + (static_cast<double>(i) + 0.5) * width_; }
  double value(std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  double mass() const { return mass_; }

  // Mass of the density restricted to [a,b], computed exactly for the
  // piecewise-constant representation (partial cells included pro rata).
  double mass_in(double a, double b) const;

  // True when the window is symmetric about 0 and values mirror exactly.
  bool is_symmetric() const;

  bool same_grid(const GridDensity& other) const;

 private:
  Domain domain_;
  double lo_, hi_, width_;
  std::vector<double> values_;
  double mass_;
};

// Exact mass reallocation of `g` onto a new uniform grid over [lo, hi) with
// `cells` cells (same domain). Mass falling outside the new window is
// dropped; pass `lost_mass` to observe how much.
GridDensity resample(const GridDensity& g, double lo, double hi, std::size_t cells,
                     double* lost_mass = nullptr);

// Adds weight * g onto an existing cell-mass accumulator with window lo and
// cell width h (the sweep primitive behind resample and the tau integral).
void accumulate_resampled(const GridDensity& g, double weight, std::vector<double>& target_masses,
                          double lo, double h, double* lost = nullptr);

// Zero-pad `g` onto an enclosing window whose grid is aligned with g's
// (edges must coincide with g's lattice).
GridDensity embed(const GridDensity& g, double lo, double hi, std::size_t cells);

// Pointwise a + w*b on identical grids.
GridDensity add_scaled(const GridDensity& a, const GridDensity& b, double w);

// Scale all values by c >= 0.
GridDensity scaled(const GridDensity& g, double c);

// A finite purely atomic measure: positions strictly increasing, weights
// positive. Duplicate positions merge on construction.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(std::vector<std::pair<double, double>> atoms);

  std::size_t size() const { return atoms_.size(); }
  double position(std::size_t i) const { return atoms_[i].first; }
  double weight(std::size_t i) const { return atoms_[i].second; }
  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
  double mass() const { return mass_; }

 private:
  std::vector<std::pair<double, double>> atoms_;
  double mass_;
};

void to_json(nlohmann::json& j, const GridDensity& g);
GridDensity grid_density_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const AtomicMeasure& m);
AtomicMeasure atomic_measure_from_json(const nlohmann::json& j);

}  // namespace specflow
