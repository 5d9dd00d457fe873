#pragma once
// Singular set of the minimum time function: endpoints x = Phi(r, zeta) of
// reversed-dynamics extremals whose costate annihilates every input column.
// At exactly these points T fails to be Lipschitz, and T(x) = r.  Phi
// integrates the forward-clock sign profile,
//
//   Phi(r, zeta) = sum_i int_0^r e^{A(t-r)} b_i sign(g_i^+(t, zeta)) dt,
//   g_i(t, zeta) = <zeta, e^{At} b_i>,
//
// piecewise-exactly between switching zeros.  Because <zeta, b_i> = 0, every
// channel starts on a zero at t = 0 and the initial sign is a right limit.

#include <cstdint>
#include <vector>

#include "mtf/synthesis.hpp"
#include "mtf/system.hpp"

namespace mtf {

struct SingularPoint {
  Vector x;
  double r = 0.0;
  Vector zeta;         // unit costate with <zeta, b_i> = 0 for every channel
  std::vector<int> j;  // j[h-1] = zeros of multiplicity h in [0, r], all channels
  long long d = 1;     // smallest integer with min zero gap >= 1/d; 1 if < 2 zeros
  int branch = 0;      // right-limit sign at 0+ on the first live channel
};

// Unit costates orthogonal to every input column: the (N-k-1)-sphere in the
// orthocomplement of span{b_i}, k = rank B.  A 0-sphere yields the two
// antipodes regardless of n; n <= 0 yields none.  Throws AssumptionError when
// k = N, where the singular set is empty.
std::vector<Vector> sample_Z(const LinearSystem& sys, int n,
                             std::uint64_t seed = 0);

// Candidates with Z-defect below 1e-8 are projected onto the orthocomplement
// and renormalized; larger defects are rejected (std::invalid_argument).
SingularPoint singular_point(const LinearSystem& sys, const Vector& zeta,
                             double r);

struct SingularResiduals {
  double ham = 0.0;       // |h(x, zeta')|, zeta' = normalized e^{r A^T} zeta
  double channel = 0.0;   // max_i |<zeta', e^{-Ar} b_i>|
  double boundary = 0.0;  // |<zeta', x> - sigma_r(zeta')|

  double max_all() const {
    return std::max(ham, std::max(channel, boundary));
  }
};

// Certificate checks of a constructed point: the transported costate must be
// a vanishing-Hamiltonian supporting normal of R_r at x.  All residuals are
// 1e-7-small for genuine singular points.
SingularResiduals verify_singular(const LinearSystem& sys,
                                  const SingularPoint& p);

// Numerical rank of [e^{-A s_1} b_c, ..., e^{-A s_j} b_c] at relative
// tolerance 1e-9.  Full rank j certifies that the switch-time parametrization
// of a stratum is an immersion at small times.
int rank_check(const LinearSystem& sys, const std::vector<double>& times,
               int channel = 0);

struct Stratum {
  double tau = 0.0;
  int switches = 0;  // interior sign changes on (0, tau)
  std::vector<SingularPoint> points;              // deduplicated by endpoint
  std::vector<std::vector<double>> switch_times;  // per kept point
  std::vector<int> ranks;                         // rank_check per kept point
};

// Slice S(tau) = {x in singular set : T(x) = tau}, grouped by interior switch
// count and ordered by it.  Refuses tau beyond the validated zero-counting
// window, outside which the switch-count stratification loses its meaning.
std::vector<Stratum> stratify_slice(const LinearSystem& sys, double tau,
                                    int n_zeta, std::uint64_t seed = 0);

// Continuation r -> Phi(r, zeta) with the costate frozen from p: the singular
// set is invariant under extending the underlying extremal.  Every sample is
// re-verified; a residual above 1e-7 aborts with the failing time in the
// message.  n_samples covers [p.r, r_max] uniformly, endpoints included.
std::vector<SingularPoint> extend_by_invariance(const LinearSystem& sys,
                                                const SingularPoint& p,
                                                double r_max,
                                                int n_samples = 21);

struct DimensionFit {
  double dimension = 0.0;
  LineFit fit;  // log(occupied cells) against log(1/scale)
  std::vector<double> scales;
  std::vector<long long> counts;
};

// Box-counting dimension estimate over the given cell sizes.
DimensionFit box_dimension(const std::vector<Vector>& points,
                           const std::vector<double>& scales);

// Product sampler: n_zeta costates in Z crossed with an n_r-point geometric
// grid on [r_min, r_max].
std::vector<SingularPoint> sample_singular_set(const LinearSystem& sys,
                                               int n_zeta, int n_r,
                                               double r_min, double r_max,
                                               std::uint64_t seed = 0);

}  // namespace mtf
