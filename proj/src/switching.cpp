#include "mtf/switching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtf/expm.hpp"

namespace mtf {

namespace {

int sgn(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Candidate window length used to pick the sampling density before the
// validated bound is known.
double window_candidate(const LinearSystem& sys) {
  const double an = std::max(sys.a_norm, 1e-9);
  return std::min(1.0, std::numbers::pi / an);
}

struct GEval {
  const LinearSystem* sys;
  Vector zeta;
  int channel;
  double dsign;  // +1 forward, -1 reversed

  double g(double t) const {
    Vector v = expm(sys->A, dsign * t) * sys->B.col(channel);
    return zeta.dot(v);
  }
  // g and its first derivative sharing one exponential.
  void g_and_dg(double t, double& g0, double& g1) const {
    Vector v = expm(sys->A, dsign * t) * sys->B.col(channel);
    g0 = zeta.dot(v);
    g1 = dsign * zeta.dot(sys->A * v);
  }
  double dg(double t, int order) const {
    Vector v = expm(sys->A, dsign * t) * sys->B.col(channel);
    for (int m = 0; m < order; ++m) v = dsign * (sys->A * v);
    return zeta.dot(v);
  }
};

// Bisection to a tight bracket, then Newton polish.  The bracket must have a
// sign change.
double refine_zero(const GEval& ge, double a, double b, double ga, double gb) {
  for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = ge.g(m);
    if (gm == 0.0) return m;
    if (sgn(gm) == sgn(ga)) {
      a = m;
      ga = gm;
    } else {
      b = m;
      gb = gm;
    }
    // Switch to Newton once the bracket is small; fall back if it escapes.
    if ((b - a) < 1e-4) {
      double t = 0.5 * (a + b);
      for (int k = 0; k < 40; ++k) {
        double g0, g1;
        ge.g_and_dg(t, g0, g1);
        if (g1 == 0.0) break;
        const double step = g0 / g1;
        const double tn = t - step;
        if (tn <= a || tn >= b) break;
        t = tn;
        if (std::abs(step) < 1e-15 * std::max(1.0, t)) break;
      }
      if (t > a && t < b) return t;
      break;
    }
  }
  (void)gb;
  return 0.5 * (a + b);
}

// Locates a zero of g' inside [a,b] given a sign change of g' there.
double refine_derivative_zero(const GEval& ge, double a, double b, double da) {
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    const double dm = ge.dg(m, 1);
    if (dm == 0.0) return m;
    if (sgn(dm) == sgn(da)) {
      a = m;
      da = dm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double switching_eval(const LinearSystem& sys, const Vector& zeta, int channel,
                      double t, Direction dir) {
  if (channel < 0 || channel >= sys.M)
    throw std::invalid_argument("switching_eval: channel out of range");
  GEval ge{&sys, zeta, channel, direction_sign(dir)};
  return ge.g(t);
}

double switching_derivative(const LinearSystem& sys, const Vector& zeta,
                            int channel, double t, Direction dir, int order) {
  if (channel < 0 || channel >= sys.M)
    throw std::invalid_argument("switching_derivative: channel out of range");
  if (order < 0) throw std::invalid_argument("switching_derivative: negative order");
  GEval ge{&sys, zeta, channel, direction_sign(dir)};
  return ge.dg(t, order);
}

std::vector<double> SwitchingProfile::switch_times() const {
  std::vector<double> out;
  for (const auto& z : zeros)
    if (z.multiplicity % 2 == 1 && z.time > 1e-12 && z.time < horizon - 1e-12)
      out.push_back(z.time);
  return out;
}

int SwitchingProfile::sign_at(double t) const {
  for (std::size_t k = 0; k < interval_signs.size(); ++k)
    if (t >= interval_breaks[k] && t <= interval_breaks[k + 1])
      return interval_signs[k];
  return 0;
}

int SwitchingProfile::zeros_in_window(double t, double window) const {
  int count = 0;
  for (const auto& z : zeros)
    if (z.time >= t - 1e-12 && z.time <= t + window + 1e-12) count += z.multiplicity;
  return count;
}

SwitchingProfile find_zeros(const LinearSystem& sys, const Vector& zeta,
                            int channel, double tau, Direction dir) {
  if (channel < 0 || channel >= sys.M)
    throw std::invalid_argument("find_zeros: channel out of range");
  if (!(tau >= 0.0)) throw std::invalid_argument("find_zeros: bad horizon");
  if (zeta.size() != sys.N) throw std::invalid_argument("find_zeros: dimension mismatch");
  if (zeta.norm() < 1e-14) throw std::invalid_argument("find_zeros: zero costate");

  SwitchingProfile prof;
  prof.channel = channel;
  prof.direction = dir;
  prof.horizon = tau;

  const double dsign = direction_sign(dir);
  GEval ge{&sys, zeta, channel, dsign};

  const Vector b = sys.B.col(channel);
  const double bnorm = b.norm();
  const double znorm = zeta.norm();
  const double anorm = std::max(sys.a_norm, 1e-9);

  auto mult_threshold = [&](int m) {
    return 1e-7 * znorm * std::pow(anorm, m) * bnorm;
  };

  auto multiplicity_at = [&](double t) {
    for (int m = 1; m <= sys.N - 1; ++m)
      if (std::abs(ge.dg(t, m)) > mult_threshold(m)) return m;
    return sys.N - 1;  // capped; normality forbids flatter contact
  };

  if (tau == 0.0) {
    prof.initial_sign = sgn(ge.g(0.0));
    return prof;
  }

  // Uniform samples by repeated application of the step matrix.
  const double step_target = window_candidate(sys) / (4.0 * sys.N);
  const int n = std::max(8, static_cast<int>(std::ceil(tau / step_target)));
  const double delta = tau / n;
  const Matrix P = expm(sys.A, dsign * delta);

  std::vector<double> gs(n + 1), dgs(n + 1);
  Vector v = b;
  for (int k = 0; k <= n; ++k) {
    gs[k] = zeta.dot(v);
    dgs[k] = dsign * zeta.dot(sys.A * v);
    if (k < n) v = P * v;
  }
  double gmax = 0.0;
  for (double g : gs) gmax = std::max(gmax, std::abs(g));
  if (gmax <= 1e-300 * znorm * bnorm || bnorm == 0.0) {
    prof.identically_zero = true;
    prof.initial_sign = 0;
    return prof;
  }
  const double eps_zero = 1e-9 * gmax;

  std::vector<double> raw;  // candidate zero times

  // Samples sitting on (or numerically at) a zero, endpoints included.  An
  // interior zero can land exactly on the grid, in which case no sign-change
  // bracket sees it; polish with guarded Newton instead.
  for (int k = 0; k <= n; ++k) {
    if (std::abs(gs[k]) > eps_zero) continue;
    double t = k * delta;
    const double lo = std::max(0.0, t - delta), hi = std::min(tau, t + delta);
    for (int it = 0; it < 30; ++it) {
      double g0, g1;
      ge.g_and_dg(t, g0, g1);
      if (std::abs(g1) < 1e-14) break;
      const double tn = t - g0 / g1;
      if (tn < lo || tn > hi) break;
      if (std::abs(tn - t) < 1e-15 * std::max(1.0, t)) {
        t = tn;
        break;
      }
      t = tn;
    }
    raw.push_back(std::clamp(t, 0.0, tau));
  }

  // Sign-change brackets.
  for (int k = 0; k < n; ++k) {
    if (std::abs(gs[k]) <= eps_zero || std::abs(gs[k + 1]) <= eps_zero) continue;
    if (sgn(gs[k]) != sgn(gs[k + 1]))
      raw.push_back(refine_zero(ge, k * delta, (k + 1) * delta, gs[k], gs[k + 1]));
  }

  // Even-multiplicity zeros and sub-grid zero pairs hide at extrema of g:
  // scan sign changes of g'.
  for (int k = 0; k < n; ++k) {
    if (sgn(dgs[k]) == 0 || sgn(dgs[k]) == sgn(dgs[k + 1])) continue;
    const double a = k * delta, bb = (k + 1) * delta;
    const double tstar = refine_derivative_zero(ge, a, bb, dgs[k]);
    const double gstar = ge.g(tstar);
    if (std::abs(gstar) <= eps_zero) {
      raw.push_back(tstar);
    } else if (sgn(gstar) != 0) {
      // Odd zeros beside the extremum, tested per half-cell.  A cell endpoint
      // that is itself a zero sample produces no bracket of its own, so the
      // other half must still be checked: with <zeta, b> = 0 every switching
      // function starts on a boundary zero and its first crossing can share
      // the first cell.
      if (std::abs(gs[k]) > eps_zero && sgn(gstar) != sgn(gs[k]))
        raw.push_back(refine_zero(ge, a, tstar, gs[k], gstar));
      if (std::abs(gs[k + 1]) > eps_zero && sgn(gstar) != sgn(gs[k + 1]))
        raw.push_back(refine_zero(ge, tstar, bb, gstar, gs[k + 1]));
    }
  }

  std::sort(raw.begin(), raw.end());
  const double merge_tol = 1e-9 * std::max(1.0, tau);
  for (double t : raw) {
    if (t < -merge_tol || t > tau + merge_tol) continue;
    t = std::clamp(t, 0.0, tau);
    if (!prof.zeros.empty() && t - prof.zeros.back().time < merge_tol) continue;
    prof.zeros.push_back({t, multiplicity_at(t)});
  }

  // Initial sign: lowest informative derivative at 0.
  {
    double g0 = gs[0];
    if (std::abs(g0) > eps_zero) {
      prof.initial_sign = sgn(g0);
    } else {
      int s = 0;
      for (int m = 1; m <= sys.N - 1 && s == 0; ++m) {
        const double d = ge.dg(0.0, m);
        if (std::abs(d) > mult_threshold(m)) s = sgn(d);
      }
      if (s == 0) s = sgn(ge.g(std::min(delta, tau) * 0.5));
      prof.initial_sign = s;
    }
  }

  // Interval sign table over distinct breakpoints {0, zeros, tau}.
  std::vector<double> breaks{0.0};
  for (const auto& z : prof.zeros)
    if (z.time > breaks.back() + merge_tol && z.time < tau - merge_tol)
      breaks.push_back(z.time);
  if (tau > breaks.back() + merge_tol) breaks.push_back(tau);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
    prof.interval_breaks.push_back(breaks[k]);
    prof.interval_signs.push_back(sgn(ge.g(mid)));
  }
  if (!prof.interval_signs.empty()) prof.interval_breaks.push_back(breaks.back());
  return prof;
}

std::vector<SwitchingProfile> sign_pattern(const LinearSystem& sys,
                                           const Vector& zeta, double tau,
                                           Direction dir) {
  std::vector<SwitchingProfile> out;
  out.reserve(sys.M);
  for (int i = 0; i < sys.M; ++i) out.push_back(find_zeros(sys, zeta, i, tau, dir));
  return out;
}

double zero_window_bound(const LinearSystem& sys, int samples, std::uint64_t seed) {
  double tau_bar = window_candidate(sys);
  Rng rng(seed);

  for (int attempt = 0; attempt < 8; ++attempt) {
    bool ok = true;
    Rng trial_rng(rng());  // same draw sequence for every attempt size
    const double horizon = std::max(3.0, 2.0 * tau_bar);
    for (int s = 0; s < samples && ok; ++s) {
      Vector zeta = random_unit_vector(sys.N, trial_rng);
      const Direction dir = (s % 2 == 0) ? Direction::Reversed : Direction::Forward;
      for (int i = 0; i < sys.M && ok; ++i) {
        SwitchingProfile prof = find_zeros(sys, zeta, i, horizon, dir);
        if (prof.identically_zero) continue;
        for (const auto& z : prof.zeros) {
          if (prof.zeros_in_window(z.time, tau_bar) > sys.N - 1) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok) return tau_bar;
    tau_bar *= 0.5;
  }
  return tau_bar;
}

}  // namespace mtf
