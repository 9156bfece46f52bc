#include "specflow/riesz.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace specflow {

RieszSpec RieszSpec::factorial(int J) {
  if (J < 1) throw ConfigError("factorial spec needs J >= 1");
  RieszSpec s;
  s.j_max_ = J;
  s.factorial_ = true;
  s.a_.assign(static_cast<std::size_t>(J), {1.0, 0.0});
  return s;
}

RieszSpec RieszSpec::from_lists(std::vector<BigInt> n, std::vector<std::complex<double>> a) {
  if (n.empty() || n.size() != a.size())
    throw ConfigError("riesz spec: n and a must be non-empty lists of equal length");
  BigInt prefix = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] <= 0) throw ConfigError("riesz spec: frequencies must be positive");
    if (i > 0 && n[i] <= n[i - 1]) throw ConfigError("riesz spec: frequencies must increase");
    if (n[i] < 2 * prefix)
      throw ConfigError("riesz spec: lacunarity n_j >= 2(n_1+...+n_{j-1}) violated");
    if (std::abs(a[i]) > 1.0 + 1e-12)
      throw ConfigError("riesz spec: weights must satisfy |a_j| <= 1");
    prefix += n[i];
  }
  RieszSpec s;
  s.j_max_ = static_cast<int>(n.size());
  s.n_ = std::move(n);
  s.a_ = std::move(a);
  return s;
}

void RieszSpec::materialize(int j) const {
  if (!factorial_) return;
  if (n_.empty()) n_.push_back(1);  // 1!
  while (static_cast<int>(n_.size()) < j)
    n_.push_back(n_.back() * static_cast<int>(n_.size() + 1));
}

std::complex<double> RieszSpec::weight(int j) const {
  if (j < 1 || j > j_max_) throw ConfigError("riesz spec: index out of range");
  return a_[static_cast<std::size_t>(j - 1)];
}

const BigInt& RieszSpec::frequency(int j) const {
  if (j < 1 || j > j_max_) throw ConfigError("riesz spec: index out of range");
  materialize(j);
  return n_[static_cast<std::size_t>(j - 1)];
}

BigInt RieszSpec::frequency_sum(int j) const {
  BigInt s = 0;
  for (int i = 1; i <= j; ++i) s += frequency(i);
  return s;
}

double RieszSpec::frequency_ratio(int j) const {
  if (j < 1 || j >= j_max_) throw ConfigError("riesz spec: ratio index out of range");
  if (factorial_) return 1.0 / static_cast<double>(j + 1);
  return frequency(j).convert_to<double>() / frequency(j + 1).convert_to<double>();
}

bool RieszSpec::strictly_lacunary() const {
  if (factorial_) return j_max_ < 2;  // equality at j = 2 and 3
  BigInt prefix = 0;
  for (int j = 1; j <= j_max_; ++j) {
    if (frequency(j) <= 2 * prefix) return false;
    prefix += frequency(j);
  }
  return true;
}

BigInt SignedRepresentation::reconstruct(const RieszSpec& spec) const {
  BigInt s = 0;
  for (const auto& [j, sign] : k) s += BigInt(sign) * spec.frequency(j);
  return s;
}

std::optional<SignedRepresentation> decompose(const RieszSpec& spec, const BigInt& m) {
  // Prefix sums n_1 + ... + n_{j-1} for the greedy threshold.
  const int J = spec.size();
  std::vector<BigInt> prefix(static_cast<std::size_t>(J) + 1, 0);
  for (int j = 1; j <= J; ++j) prefix[j] = prefix[j - 1] + spec.frequency(j);

  SignedRepresentation rep;
  BigInt r = m;
  for (int j = J; j >= 1; --j) {
    const BigInt mag = r < 0 ? BigInt(-r) : r;
    if (mag > prefix[j - 1]) {
      const int sign = r > 0 ? 1 : -1;
      rep.k[j] = sign;
      r -= BigInt(sign) * spec.frequency(j);
    }
  }
  if (r != 0) return std::nullopt;
  return rep;
}

namespace {

void enumerate_reps(const RieszSpec& spec, const std::vector<BigInt>& prefix, int j,
                    BigInt r, SignedRepresentation& current,
                    std::vector<SignedRepresentation>& out) {
  if (j == 0) {
    if (r == 0) out.push_back(current);
    return;
  }
  for (int sign = 1; sign >= -1; --sign) {
    BigInt r2 = r - BigInt(sign) * spec.frequency(j);
    if (sign == 0) r2 = r;
    const BigInt mag = r2 < 0 ? BigInt(-r2) : r2;
    if (mag > prefix[j - 1]) continue;
    if (sign != 0) current.k[j] = sign;
    enumerate_reps(spec, prefix, j - 1, r2, current, out);
    if (sign != 0) current.k.erase(j);
  }
}

}  // namespace

std::vector<SignedRepresentation> all_representations(const RieszSpec& spec, const BigInt& m) {
  const int J = spec.size();
  std::vector<BigInt> prefix(static_cast<std::size_t>(J) + 1, 0);
  for (int j = 1; j <= J; ++j) prefix[j] = prefix[j - 1] + spec.frequency(j);
  std::vector<SignedRepresentation> out;
  SignedRepresentation cur;
  const BigInt mag = m < 0 ? BigInt(-m) : m;
  if (mag <= prefix[J]) enumerate_reps(spec, prefix, J, m, cur, out);
  return out;
}

std::complex<double> fourier_coefficient(const RieszSpec& spec, const BigInt& m) {
  std::complex<double> acc(0.0, 0.0);
  for (const auto& rep : all_representations(spec, m)) {
    std::complex<double> prod(1.0, 0.0);
    for (const auto& [j, sign] : rep.k) {  // ascending j, matching partial_product
      const auto a = spec.weight(j);
      prod *= 0.5 * (sign > 0 ? a : std::conj(a));
    }
    acc += prod;
  }
  return acc;
}

TrigPoly partial_product(const RieszSpec& spec, int J) {
  if (J < 1 || J > spec.size()) throw ConfigError("partial_product: J out of range");
  TrigPoly p;
  for (int j = 1; j <= J; ++j) p = p * TrigPoly::riesz_factor(spec.frequency(j), spec.weight(j));
  return p;
}

std::vector<double> h_membership_terms(const RieszSpec& spec, const ExactFrac& theta, int J) {
  if (J < 0 || J > spec.size()) throw ConfigError("h_membership: J out of range");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(J));
  const BigInt& den = theta.den();
  BigInt n_mod = 1 % den;  // n_j mod den, updated incrementally for the factorial family
  for (int j = 1; j <= J; ++j) {
    double u;
    if (spec.is_factorial()) {
      if (j > 1) n_mod = n_mod * j % den;
      u = theta.is_zero() ? 0.0 : ExactFrac(theta.num() * n_mod, den).frac_times(1);
    } else {
      u = theta.frac_times(spec.frequency(j));
    }
    const auto a = spec.weight(j);
    const double mod_a2 = std::norm(a);
    if (mod_a2 == 0.0) {
      terms.push_back(0.0);
      continue;
    }
    const double ang = 2.0 * M_PI * u;
    const std::complex<double> z(std::cos(ang), std::sin(ang));
    terms.push_back(mod_a2 * std::norm(std::complex<double>(1.0, 0.0) - a * z));
  }
  return terms;
}

double h_membership_series(const RieszSpec& spec, const ExactFrac& theta, int J) {
  const auto terms = h_membership_terms(spec, theta, J);
  double s = 0.0;
  for (const double t : terms) s += t;
  return s;
}

double h_membership_series(const RieszSpec& spec, double theta, int J) {
  return h_membership_series(spec, ExactFrac::from_double(theta), J);
}

CriteriaSums criteria(const RieszSpec& spec) {
  if (spec.size() < 2) throw ConfigError("criteria: needs J_max >= 2");
  const int J = spec.size();
  double lac = 0.0;
  for (int j = J - 1; j >= 1; --j) {  // small terms first
    const double r = spec.frequency_ratio(j);
    lac += std::norm(spec.weight(j)) * r * r;
  }
  double ws = 0.0;
  for (int j = J; j >= 1; --j) ws += std::norm(spec.weight(j));
  double tail = 0.0;
  if (spec.is_factorial()) {
    // sum_{k>J} 1/k^2 by Euler-Maclaurin: 1/J - 1/(2J^2) + 1/(6J^3) + O(J^-5).
    const double dJ = static_cast<double>(J);
    tail = 1.0 / dJ - 1.0 / (2.0 * dJ * dJ) + 1.0 / (6.0 * dJ * dJ * dJ);
  }
  return {lac, ws, tail};
}

void to_json(nlohmann::json& j, const RieszSpec& spec) {
  if (spec.is_factorial()) {
    j = nlohmann::json{{"family", "factorial"}, {"J", spec.size()}};
    return;
  }
  auto n = nlohmann::json::array();
  auto a = nlohmann::json::array();
  for (int i = 1; i <= spec.size(); ++i) {
    n.push_back(spec.frequency(i).convert_to<long long>());
    a.push_back({spec.weight(i).real(), spec.weight(i).imag()});
  }
  j = nlohmann::json{{"n", std::move(n)}, {"a", std::move(a)}};
}

RieszSpec riesz_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("family")) {
      if (j.at("family").get<std::string>() != "factorial")
        throw ConfigError("unknown riesz family");
      return RieszSpec::factorial(j.at("J").get<int>());
    }
    std::vector<BigInt> n;
    for (const auto& e : j.at("n")) n.emplace_back(e.get<long long>());
    std::vector<std::complex<double>> a;
    for (const auto& e : j.at("a")) {
      if (e.is_number())
        a.emplace_back(e.get<double>(), 0.0);
      else
        a.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    }
    return RieszSpec::from_lists(std::move(n), std::move(a));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad riesz spec JSON: ") + e.what());
  }
}

}  // namespace specflow
