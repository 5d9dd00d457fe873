#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtf/catalog.hpp"
#include "mtf/expm.hpp"
#include "mtf/reach.hpp"
#include "mtf/singular_set.hpp"

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

TEST_CASE("Z sampling spans the input orthocomplement") {
  LinearSystem di = catalog_linear("double-integrator");
  auto z2 = sample_Z(di, 8);
  REQUIRE(z2.size() == 2);  // 0-sphere
  for (const auto& z : z2) {
    CHECK(std::abs(z.norm() - 1.0) <= 1e-14);
    CHECK(std::abs(z[1]) <= 1e-14);
  }
  CHECK(std::abs(z2[0][0] + z2[1][0]) <= 1e-14);  // antipodes

  LinearSystem tr = catalog_linear("triple-integrator");
  auto z3 = sample_Z(tr, 40);
  REQUIRE(z3.size() == 40);
  for (const auto& z : z3) {
    CHECK(std::abs(z.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(z[2]) <= 1e-12);
  }

  CHECK(sample_Z(tr, 0).empty());
  CHECK_THROWS_AS(sample_Z(catalog_linear("double-integrator-2input"), 4),
                  AssumptionError);
}

TEST_CASE("singular points match hand-integrated endpoints") {
  LinearSystem di = catalog_linear("double-integrator");
  SingularPoint p = singular_point(di, vec2(1, 0), 1.0);
  CHECK((p.x - vec2(-0.5, 1.0)).norm() <= 1e-12);
  REQUIRE(p.j.size() == 1);
  CHECK(p.j[0] == 1);  // the boundary zero of g(t) = t
  CHECK(p.d == 1);
  CHECK(p.branch == 1);

  // g never vanishes inside, so the whole family stays one arc
  for (double r : {0.3, 1.0, 2.0, 2.7}) {
    SingularPoint q = singular_point(di, vec2(1, 0), r);
    CHECK((q.x - vec2(-0.5 * r * r, r)).norm() <= 1e-10 * (1.0 + r * r));
  }

  LinearSystem tr = catalog_linear("triple-integrator");
  for (double r : {0.4, 0.7, 1.3}) {
    SingularPoint q = singular_point(tr, vec3(0, 1, 0), r);
    Vector want = vec3(r * r * r / 6.0, -r * r / 2.0, r);
    CHECK((q.x - want).norm() <= 1e-10 * (1.0 + r * r));
  }

  SingularPoint tiny = singular_point(di, vec2(1, 0), 1e-6);
  CHECK(tiny.x.norm() <= 2e-6);

  CHECK_THROWS_AS(singular_point(di, vec2(0.9, 0.1), 1.0),
                  std::invalid_argument);  // off Z
  CHECK_THROWS_AS(singular_point(di, vec2(1, 0), 0.0), std::invalid_argument);
}

TEST_CASE("central symmetry is exact") {
  LinearSystem tr = catalog_linear("triple-integrator");
  auto zs = sample_Z(tr, 17, 3);
  for (const auto& z : zs) {
    SingularPoint a = singular_point(tr, z, 0.9);
    SingularPoint b = singular_point(tr, -z, 0.9);
    CHECK((a.x + b.x).norm() == 0.0);
    CHECK(a.branch == -b.branch);
  }
}

TEST_CASE("forward construction equals reversed endpoint of the transported costate") {
  for (const char* name :
       {"double-integrator", "harmonic", "triple-integrator"}) {
    LinearSystem sys = catalog_linear(name);
    auto zs = sample_Z(sys, 15, 11);
    Rng rng(29);
    std::uniform_real_distribution<double> ur(0.1, 3.0);
    for (const auto& z : zs) {
      double r = ur(rng);
      SingularPoint p = singular_point(sys, z, r);
      Vector zp = (expm(sys.A, r).transpose() * z).normalized();
      Vector e = endpoint(sys, zp, r);
      CHECK((p.x - e).norm() <= 1e-9 * (1.0 + e.norm()));
    }
  }
}

TEST_CASE("verification residuals vanish on constructed points") {
  LinearSystem di = catalog_linear("double-integrator");
  SingularPoint p = singular_point(di, vec2(1, 0), 1.0);
  SingularResiduals res = verify_singular(di, p);
  CHECK(res.ham <= 1e-12);
  CHECK(res.channel <= 1e-12);
  CHECK(res.boundary <= 1e-12);

  // transported normal for the hand example is (1,1)/sqrt(2)
  Vector zp = (expm(di.A, 1.0).transpose() * vec2(1, 0)).normalized();
  CHECK((zp - vec2(1, 1).normalized()).norm() <= 1e-14);

  for (const char* name :
       {"double-integrator", "harmonic", "triple-integrator"}) {
    LinearSystem sys = catalog_linear(name);
    auto pts = sample_singular_set(sys, 14, 8, 0.2, 2.2, 5);
    REQUIRE(!pts.empty());
    for (const auto& q : pts) CHECK(verify_singular(sys, q).max_all() <= 1e-7);
  }
}

TEST_CASE("minimum time at singular points equals the construction time") {
  for (const char* name :
       {"double-integrator", "harmonic", "triple-integrator"}) {
    LinearSystem sys = catalog_linear(name);
    auto pts = sample_singular_set(sys, 4, 3, 0.4, 1.6, 23);
    for (const auto& p : pts) {
      MinTimeResult mt = mintime_bisection(sys, p.x);
      CHECK(mt.converged);
      CHECK(std::abs(mt.T - p.r) <= 1e-5);
    }
  }
}

TEST_CASE("slice stratification by switch count") {
  LinearSystem di = catalog_linear("double-integrator");
  auto strata = stratify_slice(di, 1.0, 8);
  REQUIRE(strata.size() == 1);
  CHECK(strata[0].switches == 0);
  REQUIRE(strata[0].points.size() == 2);
  double d0 = (strata[0].points[0].x - vec2(-0.5, 1.0)).norm();
  double d1 = (strata[0].points[1].x - vec2(-0.5, 1.0)).norm();
  CHECK(std::min(d0, d1) <= 1e-10);
  CHECK((strata[0].points[0].x + strata[0].points[1].x).norm() <= 1e-10);

  LinearSystem tr = catalog_linear("triple-integrator");
  auto ts = stratify_slice(tr, 0.5, 240);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].switches == 0);
  CHECK(ts[0].points.size() == 2);
  CHECK(ts[1].switches == 1);
  // one-switch costates occupy the two arcs tan(theta) in (-tau/2, 0); about
  // 8 percent of the circle at tau = 1/2
  CHECK(ts[1].points.size() >= 12);
  bool plus = false, minus = false;
  for (std::size_t i = 0; i < ts[1].points.size(); ++i) {
    REQUIRE(ts[1].switch_times[i].size() == 1);
    CHECK(ts[1].switch_times[i][0] > 0.0);
    CHECK(ts[1].switch_times[i][0] < 0.5);
    CHECK(ts[1].ranks[i] == 1);
    (ts[1].points[i].branch > 0 ? plus : minus) = true;
  }
  CHECK(plus);
  CHECK(minus);

  CHECK(stratify_slice(tr, 0.5, 0).empty());
  CHECK_THROWS_AS(stratify_slice(tr, 1.5, 16), AssumptionError);
}

TEST_CASE("slice points sit on the tau level set of the minimum time") {
  LinearSystem tr = catalog_linear("triple-integrator");
  auto ts = stratify_slice(tr, 0.5, 40);
  int checked = 0;
  for (const auto& s : ts)
    for (const auto& p : s.points) {
      if (checked >= 6) break;
      MinTimeResult mt = mintime_bisection(tr, p.x);
      CHECK(std::abs(mt.T - 0.5) <= 1e-5);
      ++checked;
    }
  CHECK(checked >= 4);
}

TEST_CASE("rank of exponential columns at switch times") {
  LinearSystem tr = catalog_linear("triple-integrator");
  CHECK(rank_check(tr, {0.1, 0.3}) == 2);
  CHECK(rank_check(tr, {0.2}) == 1);
  CHECK(rank_check(tr, {0.2, 0.2}) == 1);  // repeated column collapses
  CHECK(rank_check(tr, {}) == 0);
}

TEST_CASE("invariant extension stays on the singular set") {
  LinearSystem di = catalog_linear("double-integrator");
  SingularPoint p = singular_point(di, vec2(1, 0), 1.0);
  auto traj = extend_by_invariance(di, p, 2.0, 11);
  REQUIRE(traj.size() == 11);
  for (const auto& q : traj)
    CHECK((q.x - vec2(-0.5 * q.r * q.r, q.r)).norm() <= 1e-9);
  CHECK(extend_by_invariance(di, p, 1.0).size() == 1);

  LinearSystem tr = catalog_linear("triple-integrator");
  SingularPoint s0 = singular_point(tr, vec3(0, 1, 0), 0.5);
  auto traj3 = extend_by_invariance(tr, s0, 1.0, 9);
  REQUIRE(traj3.size() == 9);
  for (const auto& q : traj3) {
    Vector want = vec3(q.r * q.r * q.r / 6.0, -q.r * q.r / 2.0, q.r);
    CHECK((q.x - want).norm() <= 1e-9);
  }
}

TEST_CASE("box counting recovers known dimensions") {
  // exact oracle: 128 x 128 uniform grid in the unit square
  std::vector<Vector> grid;
  for (int i = 0; i < 128; ++i)
    for (int k = 0; k < 128; ++k)
      grid.push_back(vec2((i + 0.5) / 128.0, (k + 0.5) / 128.0));
  DimensionFit square =
      box_dimension(grid, {0.5, 0.25, 0.125, 0.0625, 0.03125});
  CHECK(std::abs(square.dimension - 2.0) <= 1e-9);
  CHECK(square.fit.r2 >= 1.0 - 1e-12);

  std::vector<Vector> same(10, vec2(0.3, 0.4));
  CHECK(std::abs(box_dimension(same, {0.5, 0.25, 0.125, 0.0625}).dimension) <=
        1e-12);

  CHECK_THROWS_AS(box_dimension(grid, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(box_dimension(grid, {0.5, 0.5}), std::invalid_argument);

  // switching curve of the double integrator is one-dimensional
  LinearSystem di = catalog_linear("double-integrator");
  std::vector<Vector> curve;
  for (const auto& p : sample_singular_set(di, 2, 3000, 0.05, 2.0, 0))
    curve.push_back(p.x);
  DimensionFit dim =
      box_dimension(curve, {0.25, 0.125, 0.0625, 0.03125, 0.015625});
  CHECK(dim.dimension >= 0.9);
  CHECK(dim.dimension <= 1.1);
  CHECK(dim.fit.r2 >= 0.98);
}
