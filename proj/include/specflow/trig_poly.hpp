#pragma once

#include <complex>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

#include "specflow/measure.hpp"

namespace specflow {

using BigInt = boost::multiprecision::cpp_int;

// A real trigonometric polynomial density on the circle, stored as a sparse
// frequency -> coefficient map: f(theta) = sum_n c_n e^{2 pi i n theta}.
// Hermitian symmetry c_{-n} = conj(c_n) is an invariant (the density is
// real); frequencies are arbitrary-precision so factorial-scale specs stay
// exact.
class TrigPoly {
 public:
  TrigPoly();  // the constant 1

  static TrigPoly constant(double c);

  // 1 + (a/2) z^n + (conj(a)/2) z^-n.
  static TrigPoly riesz_factor(const BigInt& n, std::complex<double> a);

  std::complex<double> coeff(const BigInt& n) const;
  const std::map<BigInt, std::complex<double>>& coeffs() const { return c_; }
  std::size_t term_count() const { return c_.size(); }
  BigInt max_frequency() const;

  TrigPoly operator*(const TrigPoly& other) const;

  // Largest violation of Hermitian symmetry (0 for a valid density).
  double hermitian_defect() const;

  // Exact cell averages of the density on a circle grid with `cells` cells.
  // Requires cells > 2 * max_frequency to avoid aliasing.
  GridDensity rasterize(std::size_t cells) const;

 private:
  std::map<BigInt, std::complex<double>> c_;
};

}  // namespace specflow
