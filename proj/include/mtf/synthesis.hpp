#pragma once

#include "mtf/switching.hpp"

namespace mtf {

// Direction conventions used by every module (kept in one place deliberately):
//
//   forward dynamics   xdot =  Ax + Bu, steers states toward the origin;
//   reversed dynamics  xdot = -Ax - Bu, grows reachable sets R_t from the
//                      origin, so R_t = {T <= t}.
//
//   switching profile  g_i(t) = <zeta, e^{-At} b_i>  (reversed direction),
//                      stored verbatim in BangBangControl.
//   forward control    u_i(t)    = -sign g_i(t)       (steers x to 0),
//   reversed control   u_i(t)    = -sign g_i(r - t)   (steers 0 to E(r,zeta)).
//
//   costate transport on the reversed clock: lambda(t) = e^{-A^T (r-t)} zeta,
//   where zeta is the supporting normal at the time-r endpoint; equivalently
//   lambda(t) = e^{A^T t} lambda(0).  Along a forward trajectory from x the
//   same object is lambda(s) = e^{-A^T s} zeta with zeta the normal at x.
//   With this transport h(x(t), lambda(t)) is constant exactly.

struct HamiltonianValue {
  double value = 0.0;          // <zeta, Ax> - sum_i |<zeta, b_i>|
  double drift = 0.0;          // <zeta, Ax>
  Vector channel_terms;        // per channel, -|<zeta, b_i>|
};

HamiltonianValue hamiltonian(const LinearSystem& sys, const Vector& x,
                             const Vector& zeta);

// Bang-bang control encoded as the per-channel sign structure of
// g_i(t) = <zeta, e^{-At} b_i> on [0, r].
struct BangBangControl {
  double horizon = 0.0;
  std::vector<int> initial_signs;
  std::vector<std::vector<double>> switch_times;  // strictly inside (0, r)
  std::vector<bool> dead;  // channel's g identically zero

  int channels() const { return static_cast<int>(initial_signs.size()); }
  // Sign of g_i at time t (right-continuous across switches).
  int profile_sign(int channel, double t) const;
};

BangBangControl bang_bang_from_costate(const LinearSystem& sys,
                                       const Vector& zeta, double r);

// Endpoint of the reversed-dynamics extremal:
//   E(r, zeta) = sum_i int_0^r e^{-At} b_i sign(<zeta, e^{-At} b_i>) dt.
// E maximizes <zeta, .> over R_r, so <zeta, E(r,zeta)> is the support value.
Vector endpoint(const LinearSystem& sys, const Vector& zeta, double r);

// Endpoint and support value from one pass (support = <zeta, endpoint>).
struct EndpointValue {
  Vector x;
  double support = 0.0;
};
EndpointValue endpoint_with_support(const LinearSystem& sys, const Vector& zeta,
                                    double r);

// Residual of the Hamiltonian identity
//   h(E(r,zeta), zeta) = -sum_i |<zeta, e^{-Ar} b_i>|.
double verify_compham(const LinearSystem& sys, const Vector& zeta, double r);

// Costate on the reversed clock at time t in [0, r].
Vector reversed_costate(const LinearSystem& sys, const Vector& zeta_at_r,
                        double r, double t);

struct TrajectorySample {
  double t = 0.0;
  Vector x;
  Vector u;
  Vector costate;   // empty when no costate reference was supplied
  double ham = 0.0; // h(x, costate), 0 when costate absent
};

// Integrates the piecewise-constant bang-bang flow exactly (matrix
// exponentials segment by segment, no ODE stepping).  `from` is the start
// state; reversed runs typically start at the origin.  When zeta is supplied
// the transported costate and Hamiltonian are attached to every sample.
std::vector<TrajectorySample> integrate_trajectory(
    const LinearSystem& sys, const BangBangControl& control, const Vector& from,
    Direction dir, int n_samples = 101, const Vector* zeta = nullptr);

}  // namespace mtf
