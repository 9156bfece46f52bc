#pragma once

#include <optional>
#include <variant>

#include "specflow/measure.hpp"

namespace specflow {

// A symmetric measure on the real line: the spectral measure of the Gaussian
// side. Held either as a symmetric grid density or a symmetric atom set.
// Symmetry is exact by construction: grid values mirror bitwise, atoms come
// in +/- pairs (an atom at 0 is its own mirror).
class SigmaMeasure {
 public:
  static SigmaMeasure from_grid(GridDensity g);        // validates, then mirrors exactly
  static SigmaMeasure from_atoms(AtomicMeasure a);     // validates +/- pairing
  // The classic two-point example: weight w at +x and at -x.
  static SigmaMeasure two_atoms(double x, double w);

  bool is_atomic() const { return std::holds_alternative<AtomicMeasure>(rep_); }
  const GridDensity& grid() const;
  const AtomicMeasure& atoms() const;
  double mass() const;

  // Grid form on a symmetric window [-halfwidth, halfwidth); atoms rasterize
  // by cell assignment, grids resample exactly.
  GridDensity rasterize(double halfwidth, std::size_t cells) const;

 private:
  explicit SigmaMeasure(GridDensity g) : rep_(std::move(g)) {}
  explicit SigmaMeasure(AtomicMeasure a) : rep_(std::move(a)) {}
  std::variant<GridDensity, AtomicMeasure> rep_;
};

}  // namespace specflow
