#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "specflow/riesz.hpp"
#include "specflow/rng.hpp"

using namespace specflow;

namespace {

// Random strictly lacunary spec: n_j > 2(n_1+...+n_{j-1}) with small slack.
RieszSpec random_strict_spec(std::uint64_t seed, int j_max, bool complex_weights = true) {
  rng::Engine eng(seed);
  std::vector<BigInt> n;
  long long prefix = 0;
  for (int j = 0; j < j_max; ++j) {
    const long long nj = 2 * prefix + 1 + static_cast<long long>(eng.below(8));
    n.emplace_back(nj);
    prefix += nj;
  }
  std::vector<std::complex<double>> a;
  for (int j = 0; j < j_max; ++j) {
    if (complex_weights) {
      const double r = eng.uniform(0.1, 1.0), ph = eng.uniform(0.0, 2 * M_PI);
      a.emplace_back(r * std::cos(ph), r * std::sin(ph));
    } else {
      a.emplace_back(1.0, 0.0);
    }
  }
  return RieszSpec::from_lists(std::move(n), std::move(a));
}

std::vector<long long> freq_list(const RieszSpec& spec) {
  std::vector<long long> n;
  for (int j = 1; j <= spec.size(); ++j) n.push_back(spec.frequency(j).convert_to<long long>());
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("riesz");

TEST_CASE("spec validation") {
  // factorial family attains the closed lacunarity bound at j = 2, 3
  CHECK_NOTHROW(RieszSpec::factorial(40));
  CHECK(RieszSpec::factorial(5).frequency(4).convert_to<long long>() == 24);
  CHECK_FALSE(RieszSpec::factorial(5).strictly_lacunary());
  CHECK(random_strict_spec(1, 5).strictly_lacunary());
  // closed inequality violated
  CHECK_THROWS_AS(RieszSpec::from_lists({1, 2, 5}, {{1, 0}, {1, 0}, {1, 0}}), ConfigError);
  // weight out of the disc
  CHECK_THROWS_AS(RieszSpec::from_lists({1, 3}, {{1, 0}, {1.5, 0}}), ConfigError);
  // non-increasing frequencies
  CHECK_THROWS_AS(RieszSpec::from_lists({3, 3}, {{1, 0}, {1, 0}}), ConfigError);
}

TEST_CASE("partial products") {
  SUBCASE("single factor") {
    const auto spec = RieszSpec::from_lists({1}, {{1.0, 0.0}});
    const auto p = partial_product(spec, 1);
    CHECK(p.coeff(0) == std::complex<double>(1.0, 0.0));
    CHECK(p.coeff(1) == std::complex<double>(0.5, 0.0));
    CHECK(p.coeff(-1) == std::complex<double>(0.5, 0.0));
    CHECK(p.term_count() == 3);
  }
  SUBCASE("two factors, frozen expansion") {
    const auto spec = RieszSpec::from_lists({1, 3}, {{1.0, 0.0}, {1.0, 0.0}});
    const auto p = partial_product(spec, 2);
    CHECK(p.coeff(0).real() == 1.0);
    CHECK(p.coeff(1).real() == 0.5);
    CHECK(p.coeff(-1).real() == 0.5);
    CHECK(p.coeff(3).real() == 0.5);
    CHECK(p.coeff(-3).real() == 0.5);
    CHECK(p.coeff(2).real() == 0.25);
    CHECK(p.coeff(-2).real() == 0.25);
    CHECK(p.coeff(4).real() == 0.25);
    CHECK(p.coeff(-4).real() == 0.25);
    CHECK(p.term_count() == 9);
  }
  SUBCASE("zero weight factor contributes nothing") {
    const auto spec = RieszSpec::from_lists({1, 3}, {{1.0, 0.0}, {0.0, 0.0}});
    const auto p2 = partial_product(spec, 2);
    const auto p1 = partial_product(spec, 1);
    CHECK(p2.term_count() == p1.term_count());
    CHECK(p2.coeff(1) == p1.coeff(1));
  }
  SUBCASE("coefficient at 0 is exactly 1 and the raster is a probability") {
    const auto spec = RieszSpec::factorial(5);
    const auto p = partial_product(spec, 5);
    CHECK(p.coeff(0) == std::complex<double>(1.0, 0.0));
    CHECK(p.hermitian_defect() == 0.0);
    const BigInt bound = spec.frequency_sum(5);
    CHECK(p.max_frequency() <= bound);
    const auto g = p.rasterize(1024);  // > 4 * 153
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = 0; i < g.cells(); ++i) CHECK(g.value(i) >= -1e-12);
  }
  SUBCASE("J out of range") {
    CHECK_THROWS_AS(partial_product(RieszSpec::factorial(3), 4), ConfigError);
    CHECK_THROWS_AS(partial_product(RieszSpec::factorial(3), 0), ConfigError);
  }
}

TEST_CASE("decompose: greedy examples") {
  SUBCASE("zero has the empty representation") {
    const auto spec = RieszSpec::from_lists({1, 3, 8}, {{1, 0}, {1, 0}, {1, 0}});
    const auto rep = decompose(spec, 0);
    REQUIRE(rep.has_value());
    CHECK(rep->k.empty());
  }
  SUBCASE("5 = 8 - 3 in the (1,3,8) spec") {
    const auto spec = RieszSpec::from_lists({1, 3, 8}, {{1, 0}, {1, 0}, {1, 0}});
    const auto rep = decompose(spec, 5);
    REQUIRE(rep.has_value());
    CHECK(rep->k.size() == 2);
    CHECK(rep->k.at(3) == 1);
    CHECK(rep->k.at(2) == -1);
    CHECK(rep->reconstruct(spec) == 5);
  }
  SUBCASE("4 is not representable in the (2,5) spec") {
    const auto spec = RieszSpec::from_lists({2, 5}, {{1, 0}, {1, 0}});
    CHECK_FALSE(decompose(spec, 4).has_value());
    // the representable set is {0, +-2, +-3, +-5, +-7}
    const auto brute = oracles::brute_force_representations({2, 5}, 4);
    CHECK(brute.empty());
  }
}

TEST_CASE("decompose matches exhaustive search for strict specs up to J=6") {
  int specs_checked = 0;
  for (int j_max = 1; j_max <= 6; ++j_max) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto spec = random_strict_spec(1000 * j_max + seed, j_max);
      const auto n = freq_list(spec);
      long long total = 0;
      for (const long long v : n) total += v;
      for (long long m = -total; m <= total; ++m) {
        const auto brute = oracles::brute_force_representations(n, m);
        const auto greedy = decompose(spec, BigInt(m));
        if (brute.empty()) {
          CHECK_FALSE(greedy.has_value());
        } else {
          REQUIRE(brute.size() == 1);  // strict lacunarity: uniqueness
          REQUIRE(greedy.has_value());
          CHECK(greedy->reconstruct(spec) == m);
          for (int j = 1; j <= j_max; ++j) {
            const int expect = brute[0][static_cast<std::size_t>(j - 1)];
            const int got = greedy->k.count(j) ? greedy->k.at(j) : 0;
            CHECK(got == expect);
          }
        }
      }
      ++specs_checked;
    }
  }
  CHECK(specs_checked == 60);
}

TEST_CASE("fourier coefficients") {
  SUBCASE("normalization at m = 0") {
    CHECK(fourier_coefficient(RieszSpec::factorial(6), 0) == std::complex<double>(1.0, 0.0));
  }
  SUBCASE("(1,3) at m=2 is 1/4 via the representation 3-1") {
    const auto spec = RieszSpec::from_lists({1, 3}, {{1, 0}, {1, 0}});
    CHECK(fourier_coefficient(spec, 2) == std::complex<double>(0.25, 0.0));
  }
  SUBCASE("(2,5) at m=4 vanishes") {
    const auto spec = RieszSpec::from_lists({2, 5}, {{1, 0}, {1, 0}});
    CHECK(fourier_coefficient(spec, 4) == std::complex<double>(0.0, 0.0));
  }
  SUBCASE("factorial boundary collision: rho^(3) sums both representations") {
    // 3 = 1+2 = -1-2+6; the partial products see 1/4 + 1/8.
    const auto spec = RieszSpec::factorial(4);
    const auto reps = all_representations(spec, 3);
    CHECK(reps.size() == 2);
    CHECK(fourier_coefficient(spec, 3) == std::complex<double>(0.375, 0.0));
    CHECK(partial_product(spec, 4).coeff(3) == std::complex<double>(0.375, 0.0));
  }
  SUBCASE("agrees exactly with partial-product coefficients (strict, J <= 5)") {
    for (int j_max = 2; j_max <= 5; ++j_max) {
      const auto spec = random_strict_spec(7000 + j_max, j_max);
      const auto p = partial_product(spec, j_max);
      const long long total = spec.frequency_sum(j_max).convert_to<long long>();
      for (long long m = -total; m <= total; ++m) {
        const auto lhs = fourier_coefficient(spec, BigInt(m));
        const auto rhs = p.coeff(BigInt(m));
        CHECK(lhs.real() == rhs.real());
        CHECK(lhs.imag() == rhs.imag());
      }
    }
  }
}

TEST_CASE("h membership series") {
  const auto fact = RieszSpec::factorial(40);
  SUBCASE("theta = 0 vanishes for all J") {
    CHECK(h_membership_series(fact, ExactFrac(0, 1), 40) == 0.0);
    CHECK(h_membership_series(fact, 0.0, 40) == 0.0);
  }
  SUBCASE("theta = 1/2 gives 4, only j=1 contributes") {
    for (int J : {1, 5, 40}) {
      CHECK(h_membership_series(fact, ExactFrac(1, 2), J) == doctest::Approx(4.0).epsilon(1e-14));
    }
    const auto terms = h_membership_terms(fact, ExactFrac(1, 2), 40);
    for (std::size_t j = 1; j < terms.size(); ++j) CHECK(terms[j] == 0.0);
  }
  SUBCASE("theta = 1/3 gives 6, terms j>=3 vanish exactly") {
    CHECK(h_membership_series(fact, ExactFrac(1, 3), 40) == doctest::Approx(6.0).epsilon(1e-12));
    const auto terms = h_membership_terms(fact, ExactFrac(1, 3), 40);
    CHECK(terms[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(terms[1] == doctest::Approx(3.0).epsilon(1e-12));
    for (std::size_t j = 2; j < terms.size(); ++j) CHECK(terms[j] == 0.0);
  }
  SUBCASE("rational theta = p/q stabilizes: terms vanish for j >= q (q <= 12)") {
    for (long long q = 2; q <= 12; ++q) {
      for (long long p = 1; p < q; ++p) {
        const auto terms = h_membership_terms(fact, ExactFrac(p, q), 40);
        for (std::size_t j = static_cast<std::size_t>(q) - 1; j < terms.size(); ++j)
          CHECK(terms[j] == 0.0);
      }
    }
  }
  SUBCASE("series is nonnegative and nondecreasing in J") {
    const auto terms = h_membership_terms(fact, ExactFrac::from_double(0.377), 40);
    double s = 0.0;
    for (const double t : terms) {
      CHECK(t >= 0.0);
      s += t;
    }
    CHECK(s >= 0.0);
  }
  SUBCASE("256 seeded uniform thetas: S_40 exceeds S_20 at least 250 times") {
    rng::Engine eng(20260810);
    int grew = 0;
    for (int i = 0; i < 256; ++i) {
      const double theta = eng.uniform01();
      const auto terms = h_membership_terms(fact, ExactFrac::from_double(theta), 40);
      double s20 = 0.0, s40 = 0.0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        s40 += terms[j];
        if (j < 20) s20 += terms[j];
      }
      if (s40 > s20) ++grew;
    }
    CHECK(grew >= 250);
  }
}

TEST_CASE("criteria sums") {
  SUBCASE("factorial lacunary sum converges to pi^2/6 - 1") {
    const auto c = criteria(RieszSpec::factorial(10000));
    CHECK(c.lacunary_sum + c.tail_bound ==
          doctest::Approx(M_PI * M_PI / 6.0 - 1.0).epsilon(1e-6 / 0.645));
    CHECK(c.weight_sum == doctest::Approx(10000.0));
  }
  SUBCASE("unit weights diverge linearly") {
    CHECK(criteria(RieszSpec::factorial(50)).weight_sum == doctest::Approx(50.0));
  }
  SUBCASE("geometric weights: weight_sum -> 1/3") {
    const int J = 30;
    std::vector<BigInt> n;
    std::vector<std::complex<double>> a;
    BigInt prefix = 0;
    for (int j = 1; j <= J; ++j) {
      const BigInt nj = 2 * prefix + 1;
      n.push_back(nj);
      prefix += nj;
      a.emplace_back(std::ldexp(1.0, -j), 0.0);
    }
    const auto c = criteria(RieszSpec::from_lists(std::move(n), std::move(a)));
    CHECK(c.weight_sum == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(c.lacunary_sum < 1.0 / 3.0);
  }
}

TEST_CASE("riesz spec JSON") {
  SUBCASE("factorial shorthand") {
    const auto spec = riesz_spec_from_json(nlohmann::json{{"family", "factorial"}, {"J", 7}});
    CHECK(spec.is_factorial());
    CHECK(spec.size() == 7);
    nlohmann::json j;
    to_json(j, spec);
    CHECK(j.at("family") == "factorial");
  }
  SUBCASE("explicit lists, real or [re,im] weights") {
    const auto spec = riesz_spec_from_json(
        nlohmann::json{{"n", {1, 3}}, {"a", {1.0, nlohmann::json::array({0.5, 0.25})}}});
    CHECK(spec.size() == 2);
    CHECK(spec.weight(2) == std::complex<double>(0.5, 0.25));
    nlohmann::json j;
    to_json(j, spec);
    const auto back = riesz_spec_from_json(j);
    CHECK(back.weight(2) == spec.weight(2));
    CHECK(back.frequency(2) == 3);
  }
  SUBCASE("bad inputs rejected") {
    CHECK_THROWS_AS(riesz_spec_from_json(nlohmann::json{{"family", "fibonacci"}, {"J", 3}}),
                    ConfigError);
    CHECK_THROWS_AS(riesz_spec_from_json(nlohmann::json{{"n", {1}}, {"a", {1.0, 1.0}}}),
                    ConfigError);
  }
}

TEST_SUITE_END();
