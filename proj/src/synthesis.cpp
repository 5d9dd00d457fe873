#include "mtf/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "mtf/expm.hpp"

namespace mtf {

HamiltonianValue hamiltonian(const LinearSystem& sys, const Vector& x,
                             const Vector& zeta) {
  HamiltonianValue h;
  h.drift = zeta.dot(sys.A * x);
  h.channel_terms = Vector(sys.M);
  h.value = h.drift;
  for (int i = 0; i < sys.M; ++i) {
    h.channel_terms[i] = -std::abs(zeta.dot(sys.B.col(i)));
    h.value += h.channel_terms[i];
  }
  return h;
}

int BangBangControl::profile_sign(int channel, double t) const {
  if (dead[channel]) return 0;
  int s = initial_signs[channel];
  for (double sw : switch_times[channel]) {
    if (t < sw) break;
    s = -s;
  }
  return s;
}

BangBangControl bang_bang_from_costate(const LinearSystem& sys,
                                       const Vector& zeta, double r) {
  if (zeta.size() != sys.N || zeta.norm() < 1e-14)
    throw std::invalid_argument("bang_bang_from_costate: zero or mismatched costate");
  if (!(r >= 0.0)) throw std::invalid_argument("bang_bang_from_costate: bad horizon");
  BangBangControl c;
  c.horizon = r;
  for (int i = 0; i < sys.M; ++i) {
    SwitchingProfile p = find_zeros(sys, zeta, i, r, Direction::Reversed);
    c.initial_signs.push_back(p.initial_sign);
    c.switch_times.push_back(p.switch_times());
    c.dead.push_back(p.identically_zero);
  }
  return c;
}

namespace {

// Cumulative integrals J_i(t) = int_0^t e^{-As} b_i ds at the profile's
// breakpoints, so each segment integral is one subtraction.
struct ChannelIntegrals {
  std::vector<double> breaks;
  std::vector<int> signs;
  std::vector<Vector> J;  // J at each break
};

ChannelIntegrals channel_integrals(const LinearSystem& sys,
                                   const SwitchingProfile& prof, int channel,
                                   double r) {
  ChannelIntegrals ci;
  if (prof.identically_zero || r == 0.0) return ci;
  if (prof.interval_breaks.empty()) {
    ci.breaks = {0.0, r};
    ci.signs = {prof.initial_sign};
  } else {
    ci.breaks = prof.interval_breaks;
    ci.signs = prof.interval_signs;
  }
  const int n = sys.N;
  Matrix W = Matrix::Zero(n + 1, n + 1);
  W.topLeftCorner(n, n) = -sys.A;
  W.topRightCorner(n, 1) = sys.B.col(channel);
  ci.J.reserve(ci.breaks.size());
  for (double t : ci.breaks) {
    if (t == 0.0) {
      ci.J.push_back(Vector::Zero(n));
    } else {
      Matrix E = expm(W, t);
      ci.J.push_back(E.topRightCorner(n, 1));
    }
  }
  return ci;
}

}  // namespace

EndpointValue endpoint_with_support(const LinearSystem& sys, const Vector& zeta,
                                    double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("endpoint: bad horizon");
  EndpointValue out;
  out.x = Vector::Zero(sys.N);
  if (r == 0.0) return out;
  for (int i = 0; i < sys.M; ++i) {
    SwitchingProfile prof = find_zeros(sys, zeta, i, r, Direction::Reversed);
    ChannelIntegrals ci = channel_integrals(sys, prof, i, r);
    for (std::size_t k = 0; k < ci.signs.size(); ++k)
      out.x += ci.signs[k] * (ci.J[k + 1] - ci.J[k]);
  }
  out.support = zeta.dot(out.x);
  return out;
}

Vector endpoint(const LinearSystem& sys, const Vector& zeta, double r) {
  return endpoint_with_support(sys, zeta, r).x;
}

double verify_compham(const LinearSystem& sys, const Vector& zeta, double r) {
  EndpointValue e = endpoint_with_support(sys, zeta, r);
  HamiltonianValue h = hamiltonian(sys, e.x, zeta);
  Matrix Er = expm(sys.A, -r);
  double rhs = 0.0;
  for (int i = 0; i < sys.M; ++i) rhs -= std::abs(zeta.dot(Er * sys.B.col(i)));
  return std::abs(h.value - rhs);
}

Vector reversed_costate(const LinearSystem& sys, const Vector& zeta_at_r,
                        double r, double t) {
  return expm(sys.A.transpose(), -(r - t)) * zeta_at_r;
}

std::vector<TrajectorySample> integrate_trajectory(
    const LinearSystem& sys, const BangBangControl& control, const Vector& from,
    Direction dir, int n_samples, const Vector* zeta) {
  if (from.size() != sys.N)
    throw std::invalid_argument("integrate_trajectory: state dimension mismatch");
  if (control.channels() != sys.M)
    throw std::invalid_argument("integrate_trajectory: control channel mismatch");
  if (n_samples < 1) n_samples = 1;
  const double r = control.horizon;

  // Control value at clock time t for the requested direction.
  auto control_at = [&](double t) {
    Vector u(sys.M);
    const double tp = dir == Direction::Forward ? t : r - t;
    for (int i = 0; i < sys.M; ++i) u[i] = -control.profile_sign(i, tp);
    return u;
  };

  // Merged time grid: uniform samples plus every switch instant (mapped to
  // this clock), so each integration segment has constant control.
  std::vector<double> grid;
  for (int k = 0; k < n_samples; ++k)
    grid.push_back(r * (n_samples == 1 ? 0.0 : double(k) / (n_samples - 1)));
  for (int i = 0; i < sys.M; ++i)
    for (double sw : control.switch_times[i])
      grid.push_back(dir == Direction::Forward ? sw : r - sw);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-13; }),
             grid.end());
  if (grid.empty() || grid.front() > 1e-13) grid.insert(grid.begin(), 0.0);

  std::vector<TrajectorySample> out;
  out.reserve(grid.size());

  Vector x = from;
  const double fsign = direction_sign(dir);
  Matrix At = sys.A.transpose();

  auto emit = [&](double t) {
    TrajectorySample s;
    s.t = t;
    s.x = x;
    s.u = control_at(std::min(t, r) * (1.0 - 1e-15));
    if (zeta != nullptr) {
      // Reversed clock runs 0..r with normal zeta at t = r; the forward clock
      // sees the same transport at time-to-go r - t.
      const double tau = dir == Direction::Reversed ? t : r - t;
      s.costate = expm(At, -(r - tau)) * (*zeta);
      s.ham = hamiltonian(sys, x, s.costate).value;
    }
    out.push_back(std::move(s));
  };

  emit(grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = grid[k] - grid[k - 1];
    if (h <= 0) continue;
    // Exact step: forward  x+ = e^{Ah} (x + sum u_i int_0^h e^{-As} b_i ds),
    //             reversed x+ = e^{-Ah} (x - sum u_i int_0^h e^{As} b_i ds).
    const Vector u = control_at(grid[k - 1] + 0.5 * h);
    Vector drift = Vector::Zero(sys.N);
    for (int i = 0; i < sys.M; ++i) {
      if (u[i] == 0.0) continue;
      Direction anti = dir == Direction::Forward ? Direction::Reversed
                                                 : Direction::Forward;
      drift += u[i] * expint(sys.A, sys.B.col(i), 0.0, h, anti);
    }
    x = expm(sys.A, fsign * h) * (x + fsign * drift);
    emit(grid[k]);
  }
  return out;
}

}  // namespace mtf
