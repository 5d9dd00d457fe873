#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mtf/catalog.hpp"
#include "mtf/switching.hpp"

using namespace mtf;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("switching_eval matches hand formulas") {
  LinearSystem di = catalog_linear("double-integrator");
  // Reversed: e^{-At} b = (-t, 1), so <(1,0), .> = -t.
  for (double t : {0.0, 0.5, 2.0})
    CHECK(switching_eval(di, vec2(1, 0), 0, t, Direction::Reversed) ==
          doctest::Approx(-t).epsilon(1e-12));
  CHECK(switching_eval(di, vec2(0, 1), 0, 0.0, Direction::Forward) ==
        doctest::Approx(1.0));

  LinearSystem ho = catalog_linear("harmonic");
  for (double t : {0.3, 1.0, 4.0})
    CHECK(switching_eval(ho, vec2(1, 0), 0, t, Direction::Reversed) ==
          doctest::Approx(-std::sin(t)).epsilon(1e-10));
}

TEST_CASE("switching_derivative is the analytic derivative") {
  LinearSystem ho = catalog_linear("harmonic");
  // g(t) = -sin t reversed for zeta=(1,0); g' = -cos t, g'' = sin t.
  CHECK(switching_derivative(ho, vec2(1, 0), 0, 0.7, Direction::Reversed, 1) ==
        doctest::Approx(-std::cos(0.7)).epsilon(1e-10));
  CHECK(switching_derivative(ho, vec2(1, 0), 0, 0.7, Direction::Reversed, 2) ==
        doctest::Approx(std::sin(0.7)).epsilon(1e-10));
}

TEST_CASE("find_zeros recovers the zeros of sin on [0,10]") {
  LinearSystem ho = catalog_linear("harmonic");
  SwitchingProfile p = find_zeros(ho, vec2(1, 0), 0, 10.0, Direction::Reversed);
  REQUIRE(p.zeros.size() == 4);
  const double pi = std::numbers::pi;
  CHECK(p.zeros[0].time == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(p.zeros[1].time == doctest::Approx(pi).epsilon(1e-10));
  CHECK(p.zeros[2].time == doctest::Approx(2 * pi).epsilon(1e-10));
  CHECK(p.zeros[3].time == doctest::Approx(3 * pi).epsilon(1e-10));
  for (const auto& z : p.zeros) CHECK(z.multiplicity == 1);
  CHECK(p.initial_sign == -1);
  // Switch times exclude the endpoint zeros.
  auto sw = p.switch_times();
  REQUIRE(sw.size() == 3);
  CHECK(sw[0] == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("find_zeros on the double integrator forward g = t") {
  LinearSystem di = catalog_linear("double-integrator");
  SwitchingProfile p = find_zeros(di, vec2(1, 0), 0, 1.0, Direction::Forward);
  REQUIRE(p.zeros.size() == 1);
  CHECK(p.zeros[0].time == doctest::Approx(0.0));
  CHECK(p.zeros[0].multiplicity == 1);
  CHECK(p.initial_sign == 1);
  CHECK(p.switch_times().empty());
}

TEST_CASE("find_zeros locates the quadratic roots of the triple integrator") {
  LinearSystem ti = catalog_linear("triple-integrator");
  // Forward: e^{At} b = (t^2/2, t, 1); zeta = (1,-1,0)/sqrt(2) gives
  // g = (t^2/2 - t)/sqrt(2), zeros at 0 and 2.
  Vector zeta = vec3(1, -1, 0) / std::sqrt(2.0);
  SwitchingProfile p = find_zeros(ti, zeta, 0, 3.0, Direction::Forward);
  REQUIRE(p.zeros.size() == 2);
  CHECK(p.zeros[0].time == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(p.zeros[1].time == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(p.zeros[0].multiplicity == 1);
  CHECK(p.zeros[1].multiplicity == 1);
  CHECK(p.initial_sign == -1);
  // Sign pattern: -1 on (0,2), +1 on (2,3).
  CHECK(p.sign_at(1.0) == -1);
  CHECK(p.sign_at(2.5) == 1);
}

TEST_CASE("even-multiplicity zero is detected without a sign flip") {
  LinearSystem ti = catalog_linear("triple-integrator");
  // Forward, zeta = (1,0,0): g = t^2/2, double zero at 0.
  SwitchingProfile p0 = find_zeros(ti, vec3(1, 0, 0), 0, 1.0, Direction::Forward);
  REQUIRE(p0.zeros.size() == 1);
  CHECK(p0.zeros[0].time == doctest::Approx(0.0));
  CHECK(p0.zeros[0].multiplicity == 2);
  CHECK(p0.initial_sign == 1);

  // Shifted double zero strictly inside: g = (t-1)^2/2 for
  // zeta = (1,-1,1/2)... expand: <zeta, (t^2/2, t, 1)> = t^2/2 - t + 1/2.
  Vector zeta = vec3(1, -1, 0.5);
  SwitchingProfile p1 = find_zeros(ti, zeta, 0, 2.0, Direction::Forward);
  REQUIRE(p1.zeros.size() == 1);
  CHECK(p1.zeros[0].time == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p1.zeros[0].multiplicity == 2);
  // No sign flip across an even zero.
  CHECK(p1.sign_at(0.5) == 1);
  CHECK(p1.sign_at(1.5) == 1);
  CHECK(p1.switch_times().empty());
}

TEST_CASE("close zero pairs inside one sample cell are both found") {
  LinearSystem ti = catalog_linear("triple-integrator");
  // g = (t-a)(t-b)/ something: want roots at 1 +- 0.01.
  // <zeta,(t^2/2,t,1)> = z1 t^2/2 + z2 t + z3 = (t-0.99)(t-1.01)/2 when
  // z1 = 1, z2 = -1, z3 = 0.49995.
  Vector zeta = vec3(1, -1, 0.9999 / 2.0);
  SwitchingProfile p = find_zeros(ti, zeta, 0, 2.0, Direction::Forward);
  REQUIRE(p.zeros.size() == 2);
  CHECK(p.zeros[0].time == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(p.zeros[1].time == doctest::Approx(1.01).epsilon(1e-9));
  CHECK(p.sign_at(1.0) == -1);
}

TEST_CASE("antisymmetry: flipping zeta flips signs but not zeros") {
  LinearSystem ho = catalog_linear("harmonic");
  Vector zeta = vec2(0.6, 0.8);
  SwitchingProfile p = find_zeros(ho, zeta, 0, 6.0, Direction::Reversed);
  SwitchingProfile q = find_zeros(ho, -zeta, 0, 6.0, Direction::Reversed);
  REQUIRE(p.zeros.size() == q.zeros.size());
  for (std::size_t k = 0; k < p.zeros.size(); ++k) {
    CHECK(p.zeros[k].time == doctest::Approx(q.zeros[k].time).epsilon(1e-12));
    CHECK(p.zeros[k].multiplicity == q.zeros[k].multiplicity);
  }
  CHECK(p.initial_sign == -q.initial_sign);
}

TEST_CASE("pattern matches dense sampling of g") {
  LinearSystem ti = catalog_linear("triple-integrator");
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector zeta = random_unit_vector(3, rng);
    Direction dir = trial % 2 ? Direction::Forward : Direction::Reversed;
    SwitchingProfile p = find_zeros(ti, zeta, 0, 2.0, dir);
    for (int k = 0; k <= 200; ++k) {
      double t = 2.0 * k / 200.0;
      double g = switching_eval(ti, zeta, 0, t, dir);
      if (std::abs(g) < 1e-6) continue;  // too close to a zero to compare signs
      int s = p.sign_at(t);
      if (s != 0) CHECK(s == (g > 0 ? 1 : -1));
    }
  }
}

TEST_CASE("zero count per window stays below N for random costates") {
  LinearSystem ti = catalog_linear("triple-integrator");
  double tau_bar = zero_window_bound(ti, 200, 1);
  CHECK(tau_bar > 0.0);
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Vector zeta = random_unit_vector(3, rng);
    SwitchingProfile p = find_zeros(ti, zeta, 0, 3.0, Direction::Reversed);
    for (const auto& z : p.zeros)
      CHECK(p.zeros_in_window(z.time, tau_bar) <= 2);
  }
}

TEST_CASE("zero_window_bound on catalog systems") {
  // Affine g per channel: any window works, candidate 1.0 sticks.
  CHECK(zero_window_bound(catalog_linear("double-integrator"), 100, 0) ==
        doctest::Approx(1.0));
  // Harmonic zeros are pi-separated; bound must be at most pi and positive.
  double ho = zero_window_bound(catalog_linear("harmonic"), 100, 0);
  CHECK(ho > 0.0);
  CHECK(ho <= std::numbers::pi);
}

TEST_CASE("identically vanishing switching functions are flagged, not fatal") {
  Matrix A = Matrix::Identity(2, 2);
  Matrix B(2, 1);
  B << 1, 0;
  LinearSystem sys = make_system("identity-drift", A, B);
  // zeta orthogonal to the whole Krylov span of b: g vanishes identically.
  SwitchingProfile dead = find_zeros(sys, vec2(0, 1), 0, 1.0, Direction::Forward);
  CHECK(dead.identically_zero);
  CHECK(dead.initial_sign == 0);
  CHECK(dead.zeros.empty());
  // Generic costate: g = e^t, no zeros.
  SwitchingProfile live = find_zeros(sys, vec2(1, 0), 0, 1.0, Direction::Forward);
  CHECK_FALSE(live.identically_zero);
  CHECK(live.zeros.empty());
  CHECK(live.initial_sign == 1);
}
