#include "specflow/sigma_measure.hpp"

#include <cmath>

#include "specflow/measure_ops.hpp"

namespace specflow {

SigmaMeasure SigmaMeasure::from_grid(GridDensity g) {
  if (g.domain() != Domain::RealLine)
    throw ConfigError("sigma measure: grid must live on the real line");
  if (g.lo() != -g.hi())
    throw ConfigError("sigma measure: window must be symmetric about 0");
  // Tolerate rounding-level asymmetry, then make the mirror exact.
  const std::size_t n = g.cells();
  double defect = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    defect = std::max(defect, std::fabs(g.value(i) - g.value(n - 1 - i)));
    scale = std::max(scale, g.value(i));
  }
  if (defect > 1e-9 * std::max(1.0, scale))
    throw ConfigError("sigma measure: density not symmetric");
  return SigmaMeasure(symmetrize(g));
}

SigmaMeasure SigmaMeasure::from_atoms(AtomicMeasure a) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (a.position(i) != -a.position(j) || a.weight(i) != a.weight(j))
      throw ConfigError("sigma measure: atoms must come in symmetric pairs");
  }
  return SigmaMeasure(std::move(a));
}

SigmaMeasure SigmaMeasure::two_atoms(double x, double w) {
  if (x <= 0.0) throw ConfigError("two_atoms: x must be positive");
  return SigmaMeasure(AtomicMeasure({{-x, w}, {x, w}}));
}

const GridDensity& SigmaMeasure::grid() const {
  if (is_atomic()) throw ConfigError("sigma measure: atomic, no grid form");
  return std::get<GridDensity>(rep_);
}

const AtomicMeasure& SigmaMeasure::atoms() const {
  if (!is_atomic()) throw ConfigError("sigma measure: grid-backed, no atom form");
  return std::get<AtomicMeasure>(rep_);
}

double SigmaMeasure::mass() const {
  return is_atomic() ? std::get<AtomicMeasure>(rep_).mass() : std::get<GridDensity>(rep_).mass();
}

GridDensity SigmaMeasure::rasterize(double halfwidth, std::size_t cells) const {
  if (is_atomic()) {
    // Place each +/- pair into exactly mirrored cells so the raster is
    // bitwise symmetric even when an atom sits on a cell edge.
    const double h = 2.0 * halfwidth / static_cast<double>(cells);
    std::vector<double> v(cells, 0.0);
    const std::size_t mid = cells / 2;
    for (const auto& [x, w] : atoms().atoms()) {
      if (x < 0.0) continue;  // handled by its mirror partner
      if (x >= halfwidth) throw NumericGuardError("sigma rasterize: atom outside window");
      if (x == 0.0) {
        v[mid - 1] += 0.5 * w / h;
        v[mid] += 0.5 * w / h;
        continue;
      }
      auto j = static_cast<std::size_t>(x / h);
      if (mid + j >= cells) j = mid - 1;
      v[mid + j] += w / h;
      v[mid - 1 - j] += w / h;
    }
    return GridDensity(Domain::RealLine, -halfwidth, halfwidth, std::move(v));
  }
  double lost = 0.0;
  GridDensity g = resample(grid(), -halfwidth, halfwidth, cells, &lost);
  if (lost > 1e-9 * std::max(1.0, grid().mass()))
    throw NumericGuardError("sigma rasterize: window truncates the measure");
  return g;
}

}  // namespace specflow
