#pragma once

#include "mtf/system.hpp"

namespace mtf {

// Switching function g_i(t) = <zeta, e^{sAt} b_i>, s = +1 forward, -1 reversed.
// Its sign drives the bang-bang control, its zeros are the switch times, and
// the zero multiplicities grade the singular-set strata.

struct SwitchingZero {
  double time = 0.0;
  int multiplicity = 1;
};

struct SwitchingProfile {
  int channel = 0;
  Direction direction = Direction::Reversed;
  double horizon = 0.0;
  std::vector<SwitchingZero> zeros;  // strictly increasing times in [0, horizon]
  int initial_sign = 0;              // sign of g on (0, eps)
  // True when g vanishes identically on the horizon (possible only for
  // channels violating the Kalman condition, and then only on a null set of
  // costates).  Such a channel contributes nothing to supports or endpoints.
  bool identically_zero = false;

  // Sign of g on the open intervals between consecutive members of
  // {0} U zero times U {horizon}; one entry per nonempty interval.
  std::vector<double> interval_breaks;  // size = interval count + 1
  std::vector<int> interval_signs;      // size = interval count

  // Zeros of odd multiplicity strictly inside (0, horizon): the switch times.
  std::vector<double> switch_times() const;
  // Sign of g at t (0 exactly at recorded zeros).
  int sign_at(double t) const;
  // Zero count with multiplicity over [t, t+window].
  int zeros_in_window(double t, double window) const;
};

double switching_eval(const LinearSystem& sys, const Vector& zeta, int channel,
                      double t, Direction dir);

// m-th derivative d^m/dt^m <zeta, e^{sAt} b_i> = <zeta, (sA)^m e^{sAt} b_i>.
double switching_derivative(const LinearSystem& sys, const Vector& zeta,
                            int channel, double t, Direction dir, int order);

// Locates every zero of g in [0, tau] to 1e-10 with multiplicities.
// Sign changes are bracketed on a uniform sample grid and polished by
// bisection plus Newton; even-multiplicity zeros are recovered from the zeros
// of g' where |g| falls below a relative threshold.
SwitchingProfile find_zeros(const LinearSystem& sys, const Vector& zeta,
                            int channel, double tau, Direction dir);

// All channels at once.
std::vector<SwitchingProfile> sign_pattern(const LinearSystem& sys,
                                           const Vector& zeta, double tau,
                                           Direction dir);

// Empirical window length tau_bar such that no sampled switching function has
// more than N-1 zeros (with multiplicity) in any window of that length.
// Candidate min(1, pi/||A||) is validated over random unit costates and
// halved until the check passes.
double zero_window_bound(const LinearSystem& sys, int samples = 400,
                         std::uint64_t seed = 0);

}  // namespace mtf
