#include <doctest.h>

#include <cmath>
#include <complex>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "specflow/measure_ops.hpp"
#include "specflow/rng.hpp"
#include "specflow/trig_poly.hpp"

using namespace specflow;

namespace {

GridDensity uniform_circle(std::size_t n) {
  return GridDensity(Domain::CircleUnit, 0.0, 1.0, std::vector<double>(n, 1.0));
}

// Smooth strictly positive probability density on the circle from a few low
// frequencies; used by the convolution-theorem property test.
GridDensity random_smooth_circle(std::uint64_t seed, std::size_t n) {
  rng::Engine eng(seed);
  TrigPoly p;
  for (int f = 1; f <= 3; ++f) {
    const double re = 0.3 * eng.uniform(-1.0, 1.0);
    const double im = 0.3 * eng.uniform(-1.0, 1.0);
    p = p * TrigPoly::riesz_factor(f, {re, im});
  }
  return p.rasterize(n);
}

GridDensity random_line_density(std::uint64_t seed, std::size_t n, double w) {
  rng::Engine eng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = eng.uniform(0.1, 1.0);
  GridDensity g(Domain::RealLine, -w, w, std::move(v));
  return scaled(g, 1.0 / g.mass());
}

}  // namespace

TEST_SUITE_BEGIN("measure-core");

TEST_CASE("grid density invariants") {
  CHECK_THROWS_AS(GridDensity(Domain::RealLine, 0.0, 1.0, std::vector<double>(3, 1.0)),
                  ConfigError);  // not a power of two
  CHECK_THROWS_AS(GridDensity(Domain::CircleUnit, 0.0, 2.0, std::vector<double>(4, 1.0)),
                  ConfigError);  // circle window fixed
  CHECK_THROWS_AS(GridDensity(Domain::RealLine, 0.0, 1.0, std::vector<double>{1.0, -0.5, 1.0, 1.0}),
                  NumericGuardError);  // negative beyond dust
  // dust-level negatives clamp to zero
  GridDensity g(Domain::RealLine, 0.0, 1.0, {1.0, -1e-15, 1.0, 1.0});
  CHECK(g.value(1) == 0.0);
  // mass = cell width * sum of values, to rounding
  double s = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) s += g.value(i);
  CHECK(g.mass() == doctest::Approx(s * g.cell_width()).epsilon(1e-12));
}

TEST_CASE("convolve: Haar is idempotent on the circle") {
  const auto u = uniform_circle(256);
  const auto c = convolve(u, u);
  CHECK(c.mass() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < c.cells(); ++i) CHECK(c.value(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convolve: rasterized two-atom square against the atom-list oracle") {
  const auto atoms = oracles::Atoms{{-1.0, 0.5}, {1.0, 0.5}};
  const auto expect = oracles::convolve_atoms(atoms, atoms);  // (-2,1/4),(0,1/2),(2,1/4)
  REQUIRE(expect.size() == 3);
  const auto f = GridDensity::from_atoms(Domain::RealLine, -4.0, 4.0, 1024, atoms);
  const auto c = convolve(f, f);
  CHECK(c.mass() == doctest::Approx(1.0).epsilon(1e-9));
  const double h = c.cell_width();
  for (const auto& [pos, w] : expect)
    CHECK(c.mass_in(pos - 3 * h, pos + 3 * h) == doctest::Approx(w).epsilon(1e-12));
  // nothing in between
  CHECK(c.mass_in(-1.5, -0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("convolve: rasterized point mass at 0 acts as the identity") {
  const auto f = random_line_density(7, 512, 2.0);
  const auto delta = GridDensity::from_atoms(Domain::RealLine, -2.0, 2.0, 512, {{0.0, 1.0}});
  const auto c = convolve(f, delta);
  // agreement within grid tolerance: compare coarse window masses
  for (double a = -1.6; a < 1.4; a += 0.4) {
    const double expect = f.mass_in(a, a + 0.4);
    CHECK(c.mass_in(a - 2 * c.cell_width(), a + 0.4 + 2 * c.cell_width()) ==
          doctest::Approx(expect).epsilon(0.02));
  }
  CHECK(c.mass() == doctest::Approx(f.mass()).epsilon(1e-9));
}

TEST_CASE("convolve: mass multiplies, domains must match") {
  const auto f = random_line_density(3, 256, 1.0);
  const auto g = scaled(random_line_density(4, 256, 1.0), 0.7);
  const auto c = convolve(f, g);
  CHECK(c.mass() == doctest::Approx(f.mass() * g.mass()).epsilon(1e-9));
  CHECK_THROWS_AS(convolve(f, uniform_circle(256)), NumericGuardError);
  CHECK_THROWS_AS(convolve(uniform_circle(128), uniform_circle(256)), NumericGuardError);
}

TEST_CASE("convolve: commutative and associative on matching grids") {
  const auto f = random_line_density(11, 256, 2.0);
  const auto g = random_line_density(12, 256, 2.0);
  const auto k = random_line_density(13, 256, 2.0);
  const auto fg = convolve(f, g);
  const auto gf = convolve(g, f);
  REQUIRE(fg.same_grid(gf));
  for (std::size_t i = 0; i < fg.cells(); ++i)
    CHECK(fg.value(i) == doctest::Approx(gf.value(i)).epsilon(1e-8));
  const auto fg_k = convolve(fg, k);
  const auto f_gk = convolve(f, convolve(g, k));
  REQUIRE(fg_k.same_grid(f_gk));
  double max_rel = 0.0;
  for (std::size_t i = 0; i < fg_k.cells(); ++i) {
    const double denom = std::max(1e-12, std::fabs(f_gk.value(i)));
    max_rel = std::max(max_rel, std::fabs(fg_k.value(i) - f_gk.value(i)) / denom);
  }
  CHECK(max_rel < 1e-8);
}

TEST_CASE("convolution theorem spot-check at 16 circle frequencies") {
  int checked = 0;
  for (std::uint64_t seed : {21u, 22u}) {
    const auto f = random_smooth_circle(seed, 1 << 15);
    const auto g = random_smooth_circle(seed + 100, 1 << 15);
    const auto c = convolve(f, g);
    for (int n : {-4, -3, -2, -1, 1, 2, 3, 4}) {
      const auto lhs = transform_eval(c, n);
      const auto rhs = transform_eval(f, n) * transform_eval(g, n);
      CHECK(std::abs(lhs - rhs) < 1e-7);
      ++checked;
    }
  }
  CHECK(checked == 16);
}

TEST_CASE("pushforward: scale, negate, exp, mod1") {
  const auto f = random_line_density(5, 256, 2.0);

  SUBCASE("scale 1 is the identity") {
    const auto g = pushforward(f, MapKind::Scale, 1.0);
    CHECK(g.same_grid(f));
    for (std::size_t i = 0; i < f.cells(); ++i) CHECK(g.value(i) == f.value(i));
  }
  SUBCASE("atom under scale 2") {
    const AtomicMeasure m({{1.0, 1.0}});
    const auto g = pushforward(m, MapKind::Scale, 2.0);
    CHECK(g.position(0) == 2.0);
    CHECK(g.weight(0) == 1.0);
  }
  SUBCASE("scale then inverse scale is the identity") {
    for (double s : {2.0, 0.3, -1.7}) {
      const auto g = pushforward(pushforward(f, MapKind::Scale, s), MapKind::Scale, 1.0 / s);
      REQUIRE(g.cells() == f.cells());
      CHECK(g.lo() == doctest::Approx(f.lo()).epsilon(1e-6));
      for (std::size_t i = 0; i < f.cells(); ++i)
        CHECK(g.value(i) == doctest::Approx(f.value(i)).epsilon(1e-6));
    }
  }
  SUBCASE("mass preserved under scale") {
    CHECK(pushforward(f, MapKind::Scale, 3.7).mass() == doctest::Approx(f.mass()).epsilon(1e-9));
    CHECK(pushforward(f, MapKind::Scale, -0.2).mass() == doctest::Approx(f.mass()).epsilon(1e-9));
  }
  SUBCASE("uniform on [0,2] folds to uniform circle density 1") {
    GridDensity u(Domain::RealLine, 0.0, 2.0, std::vector<double>(512, 0.5));
    const auto folded = pushforward(u, MapKind::Mod1);
    CHECK(folded.domain() == Domain::CircleUnit);
    CHECK(folded.mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < folded.cells(); ++i)
      CHECK(folded.value(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("exp relabels real-line to pos-reals-log") {
    const auto e = pushforward(f, MapKind::Exp);
    CHECK(e.domain() == Domain::PosRealsLog);
    CHECK(e.lo() == f.lo());
    for (std::size_t i = 0; i < f.cells(); ++i) CHECK(e.value(i) == f.value(i));
    CHECK_THROWS_AS(pushforward(e, MapKind::Exp), NumericGuardError);
  }
  SUBCASE("scale on the log chart is translation, s > 0 only") {
    const auto e = pushforward(f, MapKind::Exp);
    const auto t = pushforward(e, MapKind::Scale, 2.0);
    CHECK(t.lo() == doctest::Approx(e.lo() + std::log(2.0)));
    CHECK_THROWS_AS(pushforward(e, MapKind::Scale, -2.0), NumericGuardError);
  }
  SUBCASE("scale by zero rejected") {
    CHECK_THROWS_AS(pushforward(f, MapKind::Scale, 0.0), NumericGuardError);
  }
  SUBCASE("negate mirrors") {
    const auto n = pushforward(f, MapKind::Negate);
    CHECK(n.lo() == doctest::Approx(-f.hi()));
    CHECK(n.value(0) == f.value(f.cells() - 1));
  }
}

TEST_CASE("transform_eval") {
  SUBCASE("any probability measure at 0 gives 1") {
    const auto f = random_line_density(9, 256, 3.0);
    CHECK(transform_eval(f, 0.0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(transform_eval(f, 2.7)) <= f.mass() + 1e-12);
  }
  SUBCASE("two atoms give cos t") {
    const AtomicMeasure m({{-1.0, 0.5}, {1.0, 0.5}});
    for (double t : {0.0, M_PI_2, M_PI}) {
      CHECK(transform_eval(m, t).real() == doctest::Approx(std::cos(t)).epsilon(1e-12));
      CHECK(transform_eval(m, t).imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("trig poly coefficient readout") {
    const auto p = TrigPoly::riesz_factor(1, {1.0, 0.0});
    CHECK(p.coeff(1) == std::complex<double>(0.5, 0.0));
    CHECK(p.coeff(0) == std::complex<double>(1.0, 0.0));
    CHECK(p.coeff(7) == std::complex<double>(0.0, 0.0));
  }
  SUBCASE("circle transform needs integer argument") {
    const auto u = uniform_circle(64);
    CHECK(transform_eval(u, 0.0).real() == doctest::Approx(1.0));
    CHECK(std::abs(transform_eval(u, 3.0)) < 1e-12);
    CHECK_THROWS_AS(transform_eval(u, 0.5), NumericGuardError);
  }
}

TEST_CASE("hellinger affinity") {
  SUBCASE("f = g gives 1") {
    const auto f = random_line_density(17, 512, 2.0);
    CHECK(hellinger_affinity(f, f) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("disjoint supports give 0") {
    std::vector<double> a(128, 0.0), b(128, 0.0);
    for (int i = 0; i < 32; ++i) a[i] = 1.0 / (32 * (4.0 / 128));
    for (int i = 64; i < 96; ++i) b[i] = 1.0 / (32 * (4.0 / 128));
    GridDensity fa(Domain::RealLine, -2.0, 2.0, a), fb(Domain::RealLine, -2.0, 2.0, b);
    CHECK(hellinger_affinity(fa, fb) == 0.0);
  }
  SUBCASE("uniform [0,1] vs uniform [0,2]") {
    std::vector<double> a(512, 0.0), b(512, 0.5);
    for (std::size_t i = 0; i < 256; ++i) a[i] = 1.0;
    GridDensity fa(Domain::RealLine, 0.0, 2.0, a), fb(Domain::RealLine, 0.0, 2.0, b);
    CHECK(hellinger_affinity(fa, fb) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  }
  SUBCASE("non-normalized input rejected") {
    const auto f = random_line_density(18, 128, 1.0);
    CHECK_THROWS_AS(hellinger_affinity(f, scaled(f, 0.5)), NumericGuardError);
  }
  SUBCASE("affinity with a scaled Gaussian is 1 at s=1 and decreases in |log s|") {
    std::vector<double> v(4096);
    const double w = 10.0, h = 2 * w / 4096;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = -w + (static_cast<double>(i) + 0.5) * h;
      v[i] = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
    }
    GridDensity f(Domain::RealLine, -w, w, v);
    f = scaled(f, 1.0 / f.mass());
    double prev = 1.0 + 1e-12;
    for (double s : {1.0, 1.3, 1.8, 2.0, 2.5, 4.0}) {
      const auto fs = resample(pushforward(f, MapKind::Scale, s), f.lo(), f.hi(), f.cells());
      const double a = hellinger_affinity_normalized(f, fs);
      CHECK(a < prev + 1e-12);
      if (s == 1.0) CHECK(a == doctest::Approx(1.0).epsilon(1e-9));
      if (s == 2.0) CHECK(a == doctest::Approx(std::sqrt(2.0 * 2.0 / 5.0)).epsilon(1e-3));
      prev = a;
    }
  }
}

TEST_CASE("symmetrize") {
  SUBCASE("symmetric input is a fixed point") {
    std::vector<double> v(256);
    for (std::size_t i = 0; i < 128; ++i) v[i] = v[255 - i] = 0.1 + 0.01 * (i % 7);
    const GridDensity f(Domain::RealLine, -2.0, 2.0, v);
    const auto s = symmetrize(f);
    for (std::size_t i = 0; i < f.cells(); ++i) CHECK(s.value(i) == f.value(i));
  }
  SUBCASE("one-sided density mirrors with half the mass on each side") {
    std::vector<double> v(256, 0.25);
    const GridDensity f(Domain::RealLine, 0.0, 2.0, v);  // mass 1/2
    const auto s = symmetrize(f);
    CHECK(s.lo() == -2.0);
    CHECK(s.mass() == doctest::Approx(f.mass()).epsilon(1e-12));
    CHECK(s.mass_in(-2.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("half point mass at +1 becomes quarter masses at +-1") {
    const auto f = GridDensity::from_atoms(Domain::RealLine, -2.0, 2.0, 256, {{1.0, 0.5}});
    const auto s = symmetrize(f);
    CHECK(s.mass() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.mass_in(0.9, 1.1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.mass_in(-1.1, -0.9) == doctest::Approx(0.25).epsilon(1e-12));
    for (std::size_t i = 0; i < s.cells(); ++i) CHECK(s.value(i) == s.value(s.cells() - 1 - i));
  }
}

TEST_CASE("serialization round trips") {
  const auto f = random_line_density(23, 128, 1.5);
  nlohmann::json j;
  to_json(j, f);
  CHECK(j.at("domain") == "real-line");
  CHECK(j.at("grid_count") == 128);
  const auto back = grid_density_from_json(j);
  CHECK(back.same_grid(f));
  for (std::size_t i = 0; i < f.cells(); ++i) CHECK(back.value(i) == f.value(i));

  const AtomicMeasure m({{0.5, 1.0}, {-0.25, 2.0}});
  nlohmann::json ja;
  to_json(ja, m);
  const auto mb = atomic_measure_from_json(ja);
  REQUIRE(mb.size() == 2);
  CHECK(mb.position(0) == -0.25);
  CHECK(mb.weight(1) == 1.0);
}

TEST_CASE("kernels: parallel results are bitwise equal to the serial reference") {
  using namespace specflow::kernels;
  const auto f = random_line_density(31, 1024, 2.0);
  const auto g = random_line_density(32, 1024, 2.0);
  SUBCASE("linear convolution") {
    const auto a = convolve(f, g, Exec::Serial);
    const auto b = convolve(f, g, Exec::Parallel);
    for (std::size_t i = 0; i < a.cells(); ++i) CHECK(a.value(i) == b.value(i));
  }
  SUBCASE("circular convolution") {
    const auto u = random_smooth_circle(5, 1024);
    const auto v = random_smooth_circle(6, 1024);
    const auto a = convolve(u, v, Exec::Serial);
    const auto b = convolve(u, v, Exec::Parallel);
    for (std::size_t i = 0; i < a.cells(); ++i) CHECK(a.value(i) == b.value(i));
  }
  SUBCASE("character sweep: recurrence matches libm and parallel matches serial") {
    std::vector<double> masses(f.cells());
    for (std::size_t i = 0; i < f.cells(); ++i) masses[i] = f.value(i) * f.cell_width();
    std::vector<double> ts;
    for (int i = 0; i < 64; ++i) ts.push_back(-8.0 + 0.25 * i);
    const auto ref = char_function_sweep(masses, f.lo(), f.cell_width(), ts, Exec::Serial, false);
    const auto fast_s = char_function_sweep(masses, f.lo(), f.cell_width(), ts, Exec::Serial, true);
    const auto fast_p = char_function_sweep(masses, f.lo(), f.cell_width(), ts, Exec::Parallel, true);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      CHECK(std::abs(ref[i] - fast_s[i]) < 5e-12);
      CHECK(fast_s[i] == fast_p[i]);
    }
  }
  SUBCASE("symmetric convolution kernel is bitwise symmetric") {
    std::vector<double> v(512);
    rng::Engine eng(77);
    for (std::size_t i = 0; i < 256; ++i) v[i] = v[511 - i] = eng.uniform(0.0, 1.0);
    GridDensity s(Domain::RealLine, -2.0, 2.0, v);
    const auto c = convolve(s, s);
    for (std::size_t i = 0; i < c.cells(); ++i) CHECK(c.value(i) == c.value(c.cells() - 1 - i));
  }
}

TEST_CASE("resample and embed") {
  const auto f = random_line_density(41, 256, 2.0);
  SUBCASE("resample conserves covered mass") {
    double lost = 0.0;
    const auto r = resample(f, -2.0, 2.0, 512, &lost);
    CHECK(lost == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.mass() == doctest::Approx(f.mass()).epsilon(1e-12));
  }
  SUBCASE("resample reports truncation") {
    double lost = 0.0;
    const auto r = resample(f, -1.0, 1.0, 128, &lost);
    CHECK(lost == doctest::Approx(f.mass() - r.mass()).epsilon(1e-9));
    CHECK(lost > 0.0);
  }
  SUBCASE("embed needs alignment") {
    const auto e = embed(f, -4.0, 4.0, 512);
    CHECK(e.mass() == doctest::Approx(f.mass()).epsilon(1e-12));
    CHECK_THROWS_AS(embed(f, -3.7, 4.3, 512), NumericGuardError);
  }
}

TEST_SUITE_END();
