#pragma once
// Support-function calculus for the reachable sets R_t of the reversed
// dynamics and two independent minimum time solvers built on it.
//
// R_t = {x : T(x) <= t} is convex and symmetric with support function
//   sigma_t(zeta) = sum_i int_0^t |<zeta, e^{-As} b_i>| ds,
// whose gradient in zeta is the endpoint map E(t, zeta).  The support gap
//   f(t) = max_{|zeta|=1} <zeta, x> - sigma_t(zeta)
// is strictly decreasing in t and changes sign at T(x), which is the basis
// of the bisection solver.  The shooting solver instead solves the boundary
// parametrization E(r, zeta) = x in (r, zeta) by damped least squares.

#include <string>
#include <vector>

#include "mtf/synthesis.hpp"
#include "mtf/system.hpp"
#include "mtf/types.hpp"

namespace mtf {

// sigma_t(zeta), computed exactly between switching zeros.
double support(const LinearSystem& sys, const Vector& zeta, double t);

enum class Region { Interior, Boundary, Outside };

const char* region_name(Region r);

struct MembershipResult {
  Region region;
  double gap;      // support gap f(t); > 0 outside, < 0 inside
  Vector witness;  // maximizing unit costate
  bool converged;  // inner maximization made its gradient target
};

// Classifies x against R_t: outside if f > tol, boundary if |f| <= tol,
// interior otherwise.  An optional hint seeds the sphere maximization.
MembershipResult membership(const LinearSystem& sys, const Vector& x, double t,
                            double tol, const Vector* hint = nullptr);

// Warm start for grid sweeps: previous minimum time and its maximizer.
struct MinTimeHint {
  double T = -1.0;
  Vector zeta;
};

struct MinTimeResult {
  double T = 0.0;
  Vector zeta_star;    // supporting normal of R_T at x
  std::string solver;  // "bisection" or "shooting"
  double residual = 0.0;  // |f(T)| for bisection, |E(T,zeta)-x| for shooting
  bool converged = false;
};

// tol <= 0 selects the scale-aware default 1e-8 * (1 + |x|).
// Throws UnreachableError when no horizon t <= 1e3 contains x.
MinTimeResult mintime_bisection(const LinearSystem& sys, const Vector& x,
                                double tol = -1.0,
                                const MinTimeHint* hint = nullptr);

// Independent of the bisection path: multi-start damped least squares on
// E(r, zeta) = x over (r, zeta).  Non-convergence is reported through the
// converged flag with the best residual found.
MinTimeResult mintime_shooting(const LinearSystem& sys, const Vector& x,
                               double tol = -1.0);

// All local maximizers of <zeta,x> - sigma_T(zeta) with value >= -tol,
// deduplicated at angular resolution 1e-6.  Empty result signals that x is
// not on the boundary of R_T.  At corner points the normal cone is a fat
// cone and the result samples it at the seed resolution.
std::vector<Vector> normal_cone_at(const LinearSystem& sys, const Vector& x,
                                   double T, double tol = -1.0);

}  // namespace mtf
