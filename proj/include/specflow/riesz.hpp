#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "specflow/exact_frac.hpp"
#include "specflow/trig_poly.hpp"

namespace specflow {

// Generator of a Riesz product: a lacunary frequency sequence (n_j) with
// complex weights (a_j), |a_j| <= 1. Validation enforces the closed
// inequality n_j >= 2(n_1+...+n_{j-1}); the factorial family n_j = j!
// attains equality at j = 2, 3, so the strict form would reject the
// canonical example. strictly_lacunary() reports whether the strict
// inequality holds everywhere (it is what makes signed representations
// unique).
class RieszSpec {
 public:
  static RieszSpec factorial(int J);
  static RieszSpec from_lists(std::vector<BigInt> n, std::vector<std::complex<double>> a);

  int size() const { return j_max_; }
  bool is_factorial() const { return factorial_; }
  std::complex<double> weight(int j) const;  // a_j, 1-based
  const BigInt& frequency(int j) const;      // n_j, 1-based (lazily built for factorial)
  BigInt frequency_sum(int j) const;         // n_1 + ... + n_j
  double frequency_ratio(int j) const;       // n_j / n_{j+1}; exact 1/(j+1) for factorial
  bool strictly_lacunary() const;

 private:
  RieszSpec() = default;
  void materialize(int j) const;

  int j_max_ = 0;
  bool factorial_ = false;
  mutable std::vector<BigInt> n_;  // lazily extended in the factorial case
  std::vector<std::complex<double>> a_;
};

// A signed representation m = sum_j k_j n_j with k_j in {-1,+1} on the
// indices present in the map.
struct SignedRepresentation {
  std::map<int, int> k;  // 1-based index -> sign
  BigInt reconstruct(const RieszSpec& spec) const;
};

// Greedy top-down decomposition: scanning j downward, index j enters with
// sign(remainder) exactly when |remainder| > n_1 + ... + n_{j-1}. Under
// strict lacunarity this finds the unique representation; returns nullopt
// when the remainder does not reach 0.
std::optional<SignedRepresentation> decompose(const RieszSpec& spec, const BigInt& m);

// All signed representations of m (at most one under strict lacunarity; the
// factorial family has boundary collisions such as 3 = 1+2 = -1-2+6).
std::vector<SignedRepresentation> all_representations(const RieszSpec& spec, const BigInt& m);

// Fourier coefficient of the Riesz product at frequency m with the literal
// integration convention: each representation contributes
// prod_{k_j=+1} (a_j/2) * prod_{k_j=-1} (conj(a_j)/2), summed over all
// representations, which is exactly the coefficient of the partial products
// (and of their weak-* limit once the frequencies outgrow m).
std::complex<double> fourier_coefficient(const RieszSpec& spec, const BigInt& m);

// prod_{k<=J} (1 + a_k z^{n_k}/2 + conj(a_k) z^{-n_k}/2) as an exact sparse
// polynomial. Coefficient at 0 is exactly 1.
TrigPoly partial_product(const RieszSpec& spec, int J);

// Terms |a_j|^2 |1 - a_j e^{2 pi i theta n_j}|^2 for j = 1..J, with the
// fractional parts theta * n_j mod 1 computed exactly from the ExactFrac.
std::vector<double> h_membership_terms(const RieszSpec& spec, const ExactFrac& theta, int J);
double h_membership_series(const RieszSpec& spec, const ExactFrac& theta, int J);
// Overload converting the double to its exact dyadic value.
double h_membership_series(const RieszSpec& spec, double theta, int J);

struct CriteriaSums {
  double lacunary_sum;  // sum_{j<J} |a_j|^2 (n_j/n_{j+1})^2
  double weight_sum;    // sum_{j<=J} |a_j|^2
  double tail_bound;    // factorial family: analytic estimate of the lacunary tail
};
CriteriaSums criteria(const RieszSpec& spec);

void to_json(nlohmann::json& j, const RieszSpec& spec);
RieszSpec riesz_spec_from_json(const nlohmann::json& j);

}  // namespace specflow
