#pragma once

#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "specflow/common.hpp"

namespace specflow {

// An exactly represented number in [0,1): num/den with 0 <= num < den.
// Every double is a dyadic rational, so converting through ExactFrac loses
// nothing; fractional parts of huge-integer multiples (n_j theta mod 1) can
// then be computed exactly instead of through catastrophically-cancelling
// floating point.
class ExactFrac {
 public:
  using Int = boost::multiprecision::cpp_int;

  ExactFrac(Int num, Int den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_ <= 0) throw ConfigError("ExactFrac: denominator must be positive");
    num_ %= den_;
    if (num_ < 0) num_ += den_;
    reduce();
  }

  static ExactFrac from_double(double x) {
    if (!(x >= 0.0 && x < 1.0) || !std::isfinite(x))
      throw ConfigError("ExactFrac: value must lie in [0,1)");
    if (x == 0.0) return ExactFrac(0, 1);
    int e = 0;
    const double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    // x = mant * 2^(e-53) with e <= 0, so den = 2^(53-e).
    Int den = Int(1) << static_cast<unsigned>(53 - e);
    return ExactFrac(Int(mant), std::move(den));
  }

  const Int& num() const { return num_; }
  const Int& den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  // Fractional part of (n * this), exact, returned as the nearest double.
  // Zero is exact: the result is 0.0 iff den | n * num.
  double frac_times(const Int& n) const {
    Int r = (n % den_) * num_ % den_;
    if (r < 0) r += den_;
    if (r == 0) return 0.0;
    return r.convert_to<double>() / den_.convert_to<double>();
  }

 private:
  void reduce() {
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    Int g = boost::multiprecision::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  Int num_, den_;
};

}  // namespace specflow
