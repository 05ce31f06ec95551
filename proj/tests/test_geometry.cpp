#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>

#include "hypermap/geometry.hpp"
#include "hypermap/rng.hpp"

using namespace hypermap;
using Catch::Approx;

namespace {

// 50-digit evaluation of the hyperbolic law of cosines, independent of the
// double-precision path under test.
double distance_oracle(double r_a, double th_a, double r_b, double th_b, double zeta) {
  using mp = boost::multiprecision::cpp_bin_float_50;
  mp z = zeta;
  mp d = abs(mp(th_a) - mp(th_b));
  mp pi_mp = acos(mp(-1));
  d = fmod(d, 2 * pi_mp);
  mp dtheta = pi_mp - abs(pi_mp - d);
  mp arg = cosh(z * mp(r_a)) * cosh(z * mp(r_b)) - sinh(z * mp(r_a)) * sinh(z * mp(r_b)) * cos(dtheta);
  if (arg < 1) arg = 1;
  return static_cast<double>(acosh(arg) / z);
}

ModelParams reference_params(long long t = 5000) {
  return ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, t);
}

}  // namespace

TEST_CASE("radial coordinates") {
  ModelParams p = reference_params();
  SECTION("birth radius") {
    CHECK(radial_initial(1, p) == 0.0);
    ModelParams z2 = p;
    z2.zeta = 2.0;
    CHECK(radial_initial(10, z2) == Approx(2.302585092994046).epsilon(1e-12));
    CHECK(radial_initial(100, p) == Approx(9.210340371976184).epsilon(1e-12));
    CHECK_THROWS_AS(radial_initial(0, p), std::invalid_argument);
  }
  SECTION("drifted radius") {
    CHECK(radial_at(7, 7, p) == Approx(radial_initial(7, p)).margin(1e-14));
    ModelParams b1 = p;
    b1.beta = 1.0;
    CHECK(radial_at(3, 9, b1) == Approx(radial_initial(3, b1)).margin(1e-14));
    ModelParams half = p;
    half.beta = 0.5;
    CHECK(radial_at(2, 8, half) == Approx(2.772588722239781).epsilon(1e-12));  // ln 16
    CHECK_THROWS_AS(radial_at(9, 3, p), std::invalid_argument);
  }
}

TEST_CASE("hyperbolic distance") {
  SECTION("colinear and coincident points") {
    CHECK(hyperbolic_distance({3.0, 1.0}, {5.0, 1.0}, 1.0) == Approx(2.0).margin(1e-10));
    CHECK(hyperbolic_distance({5.0, 2.0}, {5.0, 2.0}, 1.0) == Approx(0.0).margin(1e-12));
  }
  SECTION("antipodal identity") {
    // cosh^2(5) + sinh^2(5) = cosh(10), so the distance is exactly 10.
    double x = hyperbolic_distance({5.0, 0.0}, {5.0, std::numbers::pi}, 1.0);
    CHECK(x == Approx(10.0).margin(1e-9));
  }
  SECTION("50-digit oracle on random coordinate pairs") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      double zeta = 0.5 + 3.5 * rng.uniform();
      PolarCoord a{15.0 * rng.uniform(), rng.angle()};
      PolarCoord b{15.0 * rng.uniform(), rng.angle()};
      double got = hyperbolic_distance(a, b, zeta);
      double want = distance_oracle(a.r, a.theta, b.r, b.theta, zeta);
      CHECK(got == Approx(want).margin(1e-9));
      CHECK(hyperbolic_distance(b, a, zeta) == got);  // exact symmetry
    }
  }
  SECTION("monotone in the angular separation") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
      double zeta = 0.5 + 2.0 * rng.uniform();
      double ra = 12.0 * rng.uniform(), rb = 12.0 * rng.uniform();
      double d1 = std::numbers::pi * rng.uniform();
      double d2 = std::numbers::pi * rng.uniform();
      if (d1 > d2) std::swap(d1, d2);
      double x1 = hyperbolic_distance({ra, 0.0}, {rb, d1}, zeta);
      double x2 = hyperbolic_distance({ra, 0.0}, {rb, d2}, zeta);
      CHECK(x1 <= x2 + 1e-12);
      CHECK(x1 >= std::fabs(ra - rb) - 1e-9);
    }
  }
}

TEST_CASE("connection probability") {
  CHECK(connection_probability(7.0, 7.0, 0.3, 1.0) == Approx(0.5).epsilon(1e-12));
  CHECK(connection_probability(1e9, 1.0, 0.3, 1.0) == Approx(0.0).margin(1e-12));
  CHECK(connection_probability(-1e9, 1.0, 0.3, 1.0) == Approx(1.0).margin(1e-12));
  CHECK(connection_probability(2.0, 1.0, 0.5, 1.0) == Approx(0.2689414213699951).epsilon(1e-12));
  CHECK_THROWS_AS(connection_probability(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  SECTION("strictly decreasing in distance") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      double T = 0.05 + 0.9 * rng.uniform();
      double x1 = 20.0 * rng.uniform();
      double x2 = x1 + 1e-6 + 5.0 * rng.uniform();
      CHECK(connection_probability(x1, 8.0, T, 1.0) > connection_probability(x2, 8.0, T, 1.0));
    }
  }
}

TEST_CASE("expected degree") {
  ModelParams p = reference_params();
  SECTION("final node expects exactly m") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
      ModelParams q;
      q.m = 3.0 * rng.uniform();
      q.L = 4.0 * rng.uniform();
      q.T = 0.05 + 0.9 * rng.uniform();
      q.zeta = 0.5 + rng.uniform();
      q.t = 10 + static_cast<long long>(rng.below(5000));
      q.beta = (trial % 5 == 0) ? 0.5 : 0.05 + 0.90 * rng.uniform();  // exercise the limit branch
      CHECK(expected_degree_mbar(q.t, q) == Approx(q.m).margin(1e-12));
    }
  }
  SECTION("no internal links means m everywhere") {
    ModelParams q = p;
    q.L = 0.0;
    for (long long i : {1, 7, 500, 5000}) CHECK(expected_degree_mbar(i, q) == Approx(q.m).margin(1e-12));
  }
  SECTION("frozen reference value") {
    // 50-digit evaluation of the closed form at i=100, t=5000.
    CHECK(expected_degree_mbar(100, p) == Approx(16.906961894792782).epsilon(1e-12));
  }
  SECTION("mean over births (direct numerical summation)") {
    // The t -> infinity design target for this mean is m + L; at t = 5000 the
    // closed form genuinely sums lower. Frozen from a 50-digit evaluation.
    double sum = 0.0;
    for (long long i = 1; i <= p.t; ++i) sum += expected_degree_mbar(i, p);
    CHECK(sum / static_cast<double>(p.t) == Approx(3.6101786410135194).epsilon(1e-10));
  }
  SECTION("decays in rank past a tiny head when internal links exist") {
    // The closed form is not globally monotone: the i = 1 value collapses to
    // m (vanishing bracket) and the product of the two brackets peaks at
    // i = 3 for these parameters before decaying for good.
    ModelParams q = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 1000);
    long long peak = 1;
    for (long long i = 2; i <= q.t; ++i)
      if (expected_degree_mbar(i, q) > expected_degree_mbar(peak, q)) peak = i;
    CHECK(peak <= 4);
    double prev = expected_degree_mbar(peak, q);
    for (long long i = peak + 1; i <= q.t; ++i) {
      double cur = expected_degree_mbar(i, q);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
    CHECK(expected_degree_mbar(1, q) == Approx(q.m).margin(1e-12));
  }
  SECTION("degenerate exponent is rejected") {
    ModelParams q = p;
    q.beta = 1.0;
    CHECK_THROWS_WITH(expected_degree_mbar(10, q), Catch::Matchers::ContainsSubstring("beta = 1"));
  }
}

TEST_CASE("cutoff radius") {
  ModelParams p = reference_params();
  SECTION("rank one sentinel") {
    CHECK(cutoff_radius(1, p) == -std::numeric_limits<double>::infinity());
  }
  SECTION("radial integral limit at beta = 1") {
    CHECK(radial_integral(10, 1.0) == Approx(std::log(10.0)).epsilon(1e-12));
  }
  SECTION("frozen reference value") {
    // i=100, t=5000, m=1.5, L=2.5, gamma=2.1, T=0.4, zeta=1 checked against an
    // independent 50-digit evaluation of the closed form.
    CHECK(cutoff_radius(100, p) == Approx(12.561422939122223).epsilon(1e-12));
  }
  SECTION("vanishing expected degree is rejected") {
    ModelParams q = p;
    q.m = 0.0;
    q.L = 0.0;
    CHECK_THROWS_AS(cutoff_radius(10, q), std::invalid_argument);
  }
}

TEST_CASE("curvature rescaling cancels") {
  for (double zeta : {0.5, 1.0, 4.0}) {
    ModelParams p = ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, zeta, 5000);
    CHECK(zeta * radial_at(17, 400, p) == Approx(1.0 * radial_at(17, 400, reference_params())).epsilon(1e-9));
    CHECK(zeta * cutoff_radius(100, p) == Approx(1.0 * cutoff_radius(100, reference_params())).epsilon(1e-9));
    PolarCoord a{9.0 / zeta, 0.3}, b{7.0 / zeta, 5.1};
    PolarCoord a1{9.0, 0.3}, b1{7.0, 5.1};
    CHECK(zeta * hyperbolic_distance(a, b, zeta) ==
          Approx(hyperbolic_distance(a1, b1, 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_WITH(ModelParams::from_gamma(1.5, 2.5, 2.1, 0.0, 1.0, 10),
                    Catch::Matchers::ContainsSubstring("(0, 1)"));
  CHECK_THROWS_AS(ModelParams::from_gamma(1.5, 2.5, 2.1, 0.005, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::from_gamma(1.5, 2.5, 1.9, 0.4, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::from_gamma(-0.1, 2.5, 2.1, 0.4, 1.0, 10), std::invalid_argument);
  CHECK_NOTHROW(ModelParams::from_gamma(1.5, 2.5, 2.1, 0.4, 1.0, 10));
}
