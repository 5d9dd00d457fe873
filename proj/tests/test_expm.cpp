#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtf/expm.hpp"

using namespace mtf;

namespace {

Matrix shift_matrix(int n) {
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  return A;
}

Matrix rotation_generator() {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  return A;
}

}  // namespace

TEST_CASE("expm of nilpotent shift matches polynomial closed form") {
  for (double t : {-3.0, -0.5, 0.0, 0.25, 1.0, 7.0}) {
    Matrix E = expm(shift_matrix(2), t);
    CHECK(E(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(E(0, 1) == doctest::Approx(t).epsilon(1e-14));
    CHECK(E(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(E(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (double t : {-2.0, 0.7, 4.0}) {
    Matrix E = expm(shift_matrix(3), t);
    CHECK(E(0, 1) == doctest::Approx(t).epsilon(1e-13));
    CHECK(E(0, 2) == doctest::Approx(t * t / 2).epsilon(1e-13));
    CHECK(E(1, 2) == doctest::Approx(t).epsilon(1e-13));
    CHECK(E(2, 0) == 0.0);
  }
}

TEST_CASE("expm of rotation generator is a rotation matrix") {
  for (double t : {-10.0, -1.0, 0.1, 1.0, 3.14159, 25.0}) {
    Matrix E = expm(rotation_generator(), t);
    CHECK(E(0, 0) == doctest::Approx(std::cos(t)).epsilon(1e-12));
    CHECK(E(0, 1) == doctest::Approx(std::sin(t)).epsilon(1e-12));
    CHECK(E(1, 0) == doctest::Approx(-std::sin(t)).epsilon(1e-12));
    CHECK(E(1, 1) == doctest::Approx(std::cos(t)).epsilon(1e-12));
  }
}

TEST_CASE("expm of diagonal matrix exponentiates entries") {
  Matrix D = Matrix::Zero(3, 3);
  D(0, 0) = -2.0;
  D(1, 1) = 0.5;
  D(2, 2) = 3.0;
  Matrix E = expm(D, 1.7);
  for (int i = 0; i < 3; ++i)
    CHECK(E(i, i) == doctest::Approx(std::exp(D(i, i) * 1.7)).epsilon(1e-13));
  CHECK(std::abs(E(0, 1)) < 1e-15);
}

TEST_CASE("expm satisfies the semigroup and inverse identities") {
  Rng rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    int n = 2 + trial % 4;
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
    Matrix Es = expm(M, 0.6);
    Matrix Et = expm(M, 1.1);
    Matrix Est = expm(M, 1.7);
    CHECK((Es * Et - Est).norm() < 1e-10 * Est.norm());
    Matrix Einv = expm(M, -0.6);
    CHECK((Es * Einv - Matrix::Identity(n, n)).norm() < 1e-11);
  }
}

TEST_CASE("expm handles moderately large arguments by squaring") {
  Matrix A = rotation_generator();
  Matrix E = expm(A, 50.0);
  CHECK(E(0, 0) == doctest::Approx(std::cos(50.0)).epsilon(1e-10));
  // e^{At} stays orthogonal for all t.
  CHECK((E.transpose() * E - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("expm throws on overflow") {
  Matrix M(1, 1);
  M << 1000.0;
  CHECK_THROWS_AS(expm(M, 1.0), std::range_error);
  Matrix bad(2, 2);
  bad << 1.0, std::nan(""), 0.0, 1.0;
  CHECK_THROWS_AS(expm(bad, 1.0), std::invalid_argument);
}

TEST_CASE("expint matches hand integrals for the shift system") {
  Matrix A = shift_matrix(2);
  Vector b(2);
  b << 0, 1;
  // Reversed: e^{-As} b = (-s, 1), integral over [0,t] is (-t^2/2, t).
  for (double t : {0.3, 1.0, 2.5}) {
    Vector J = expint(A, b, 0.0, t, Direction::Reversed);
    CHECK(J[0] == doctest::Approx(-t * t / 2).epsilon(1e-12));
    CHECK(J[1] == doctest::Approx(t).epsilon(1e-12));
    Vector Jf = expint(A, b, 0.0, t, Direction::Forward);
    CHECK(Jf[0] == doctest::Approx(t * t / 2).epsilon(1e-12));
    CHECK(Jf[1] == doctest::Approx(t).epsilon(1e-12));
  }
  // Subinterval is the difference of the cumulative integrals.
  Vector Jab = expint(A, b, 0.5, 1.5, Direction::Reversed);
  CHECK(Jab[0] == doctest::Approx(-(1.5 * 1.5 - 0.5 * 0.5) / 2).epsilon(1e-12));
  CHECK(Jab[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expint matches hand integrals for the rotation system") {
  Matrix A = rotation_generator();
  Vector b(2);
  b << 0, 1;
  // Reversed: e^{-As} b = (-sin s, cos s); cumulative integral (cos t - 1, sin t).
  for (double t : {0.2, 1.0, 4.0, 9.5}) {
    Vector J = expint(A, b, 0.0, t, Direction::Reversed);
    CHECK(J[0] == doctest::Approx(std::cos(t) - 1.0).epsilon(1e-11));
    CHECK(J[1] == doctest::Approx(std::sin(t)).epsilon(1e-11));
  }
}

TEST_CASE("krylov_chain lists b, Ab, A^2 b") {
  Matrix A = shift_matrix(3);
  Vector b(3);
  b << 0, 0, 1;
  auto chain = krylov_chain(A, b, 3);
  REQUIRE(chain.size() == 3);
  CHECK(chain[0] == b);
  Vector ab(3);
  ab << 0, 1, 0;
  CHECK(chain[1] == ab);
  Vector aab(3);
  aab << 1, 0, 0;
  CHECK(chain[2] == aab);
}

TEST_CASE("sphere_points are unit length and deterministic") {
  for (int dim : {2, 3, 5}) {
    auto pts = sphere_points(dim, 64, 11);
    REQUIRE(pts.size() == 64);
    for (const auto& p : pts) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    auto again = sphere_points(dim, 64, 11);
    for (std::size_t i = 0; i < pts.size(); ++i)
      CHECK((pts[i] - again[i]).norm() == 0.0);
  }
}

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double xi : x) y.push_back(-0.5 * xi + 2.0);
  auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}
