#include "specflow/trig_poly.hpp"

#include <cmath>

namespace specflow {

TrigPoly::TrigPoly() { c_[0] = {1.0, 0.0}; }

TrigPoly TrigPoly::constant(double c) {
  TrigPoly p;
  p.c_.clear();
  if (c != 0.0) p.c_[0] = {c, 0.0};
  return p;
}

TrigPoly TrigPoly::riesz_factor(const BigInt& n, std::complex<double> a) {
  TrigPoly p;
  if (n <= 0) throw ConfigError("riesz_factor: frequency must be positive");
  if (a != std::complex<double>(0.0, 0.0)) {
    p.c_[n] = 0.5 * a;
    p.c_[-n] = 0.5 * std::conj(a);
  }
  return p;
}

std::complex<double> TrigPoly::coeff(const BigInt& n) const {
  const auto it = c_.find(n);
  return it == c_.end() ? std::complex<double>(0.0, 0.0) : it->second;
}

BigInt TrigPoly::max_frequency() const {
  BigInt m = 0;
  for (const auto& [n, c] : c_) {
    BigInt a = n < 0 ? BigInt(-n) : n;
    if (a > m) m = a;
  }
  return m;
}

TrigPoly TrigPoly::operator*(const TrigPoly& other) const {
  TrigPoly out;
  out.c_.clear();
  for (const auto& [n1, a1] : c_)
    for (const auto& [n2, a2] : other.c_) out.c_[n1 + n2] += a1 * a2;
  return out;
}

double TrigPoly::hermitian_defect() const {
  double d = 0.0;
  for (const auto& [n, a] : c_) {
    const auto mirror = coeff(-n);
    d = std::max(d, std::abs(a - std::conj(mirror)));
  }
  return d;
}

GridDensity TrigPoly::rasterize(std::size_t cells) const {
  const BigInt maxf = max_frequency();
  if (BigInt(2) * maxf >= BigInt(cells))
    throw NumericGuardError("rasterize: grid too coarse for the polynomial's frequencies");
  const double h = 1.0 / static_cast<double>(cells);
  std::vector<double> v(cells, 0.0);
  for (const auto& [nb, a] : c_) {
    const auto n = nb.convert_to<long long>();
    if (n == 0) {
      for (double& x : v) x += a.real();
      continue;
    }
    // Exact cell average of e^{2 pi i n theta}: value at the center times
    // sin(pi n h)/(pi n h).
    const double damp = std::sin(M_PI * n * h) / (M_PI * n * h);
    for (std::size_t i = 0; i < cells; ++i) {
      const double th = (static_cast<double>(i) + 0.5) * h;
      const double ang = 2.0 * M_PI * static_cast<double>(n) * th;
      v[i] += damp * (a.real() * std::cos(ang) - a.imag() * std::sin(ang));
    }
  }
  return GridDensity(Domain::CircleUnit, 0.0, 1.0, std::move(v));
}

}  // namespace specflow
