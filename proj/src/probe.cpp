#include "mtf/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_geometry(const GridField& f) {
  if (f.lo.size() != f.hi.size() ||
      f.res.size() != static_cast<std::size_t>(f.lo.size()))
    throw std::invalid_argument("grid: inconsistent box and resolution");
  for (std::size_t a = 0; a < f.res.size(); ++a)
    if (f.res[a] < 2 || !(f.hi[static_cast<int>(a)] > f.lo[static_cast<int>(a)]))
      throw std::invalid_argument("grid: need res >= 2 and hi > lo per axis");
}

}  // namespace

long long GridField::size() const {
  long long n = 1;
  for (int r : res) n *= r;
  return n;
}

double GridField::cell(int axis) const {
  return (hi[axis] - lo[axis]) / (res[static_cast<std::size_t>(axis)] - 1);
}

long long GridField::flat(const std::vector<int>& idx) const {
  long long k = 0;
  for (std::size_t a = 0; a < res.size(); ++a) k = k * res[a] + idx[a];
  return k;
}

std::vector<int> GridField::unflat(long long k) const {
  std::vector<int> idx(res.size());
  for (std::size_t a = res.size(); a-- > 0;) {
    idx[a] = static_cast<int>(k % res[a]);
    k /= res[a];
  }
  return idx;
}

Vector GridField::node(const std::vector<int>& idx) const {
  Vector x(lo.size());
  for (int a = 0; a < x.size(); ++a)
    x[a] = lo[a] + cell(a) * idx[static_cast<std::size_t>(a)];
  return x;
}

double GridField::interp(const Vector& x) const {
  const int d = dim();
  std::vector<int> base(static_cast<std::size_t>(d));
  std::vector<double> frac(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    double u = (x[a] - lo[a]) / cell(a);
    u = std::clamp(u, 0.0, static_cast<double>(res[static_cast<std::size_t>(a)] - 1));
    int i = std::min(static_cast<int>(u), res[static_cast<std::size_t>(a)] - 2);
    base[static_cast<std::size_t>(a)] = i;
    frac[static_cast<std::size_t>(a)] = u - i;
  }
  double acc = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const bool hi_side = corner & (1 << a);
      idx[static_cast<std::size_t>(a)] =
          base[static_cast<std::size_t>(a)] + (hi_side ? 1 : 0);
      w *= hi_side ? frac[static_cast<std::size_t>(a)]
                   : 1.0 - frac[static_cast<std::size_t>(a)];
    }
    if (w > 0.0) acc += w * values[static_cast<std::size_t>(flat(idx))];
  }
  return acc;
}

GridField eval_grid(const LinearSystem& sys, const Vector& lo, const Vector& hi,
                    const std::vector<int>& res, double tol) {
  GridField f;
  f.lo = lo;
  f.hi = hi;
  f.res = res;
  f.solver = "bisection";
  f.tol = tol;
  check_geometry(f);
  if (static_cast<int>(res.size()) != sys.N)
    throw std::invalid_argument("eval_grid: box dimension != state dimension");

  const long long n = f.size();
  f.values.assign(static_cast<std::size_t>(n), kNaN);
  f.status.assign(static_cast<std::size_t>(n), 0);

  MinTimeHint hint;
  for (long long k = 0; k < n; ++k) {
    Vector x = f.node(f.unflat(k));
    try {
      MinTimeResult mt =
          mintime_bisection(sys, x, tol, hint.T > 0 ? &hint : nullptr);
      f.values[static_cast<std::size_t>(k)] = mt.T;
      f.status[static_cast<std::size_t>(k)] = mt.converged ? 1 : 0;
      if (mt.converged && mt.T > 0) {
        hint.T = mt.T;
        hint.zeta = mt.zeta_star;
      }
    } catch (const UnreachableError&) {
      // flagged by status, sweep continues
    }
  }
  return f;
}

std::vector<double> quotient_scan(const GridField& field,
                                  const std::vector<int>& node,
                                  const std::vector<double>& radii) {
  check_geometry(field);
  const int d = field.dim();
  const long long k0 = field.flat(node);
  std::vector<double> out(radii.size(), kNaN);
  if (!field.status[static_cast<std::size_t>(k0)]) return out;
  const Vector x0 = field.node(node);
  const double T0 = field.values[static_cast<std::size_t>(k0)];

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double rho = radii[ri];
    if (!(rho > 0.0)) continue;
    // per-axis step count so each probe lands about rho away along its axes
    std::vector<long long> span(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
      span[static_cast<std::size_t>(a)] =
          std::max(1LL, std::llround(rho / field.cell(a)));
    double best = -1.0;
    std::vector<int> sgn(static_cast<std::size_t>(d), -1), it(node.begin(),
                                                              node.end());
    // odometer over the offset family {-1,0,1}^d minus the origin
    while (true) {
      bool zero = true, inside = true;
      for (int a = 0; a < d; ++a) {
        const int s = sgn[static_cast<std::size_t>(a)];
        if (s != 0) zero = false;
        const long long j =
            node[static_cast<std::size_t>(a)] +
            s * span[static_cast<std::size_t>(a)];
        if (j < 0 || j >= field.res[static_cast<std::size_t>(a)]) inside = false;
        it[static_cast<std::size_t>(a)] = static_cast<int>(j);
      }
      if (!zero && inside) {
        const long long k = field.flat(it);
        if (field.status[static_cast<std::size_t>(k)]) {
          const double dist = (field.node(it) - x0).norm();
          const double q =
              std::abs(field.values[static_cast<std::size_t>(k)] - T0) / dist;
          best = std::max(best, q);
        }
      }
      int a = d - 1;
      while (a >= 0 && ++sgn[static_cast<std::size_t>(a)] > 1) {
        sgn[static_cast<std::size_t>(a)] = -1;
        --a;
      }
      if (a < 0) break;
    }
    if (best >= 0.0) out[ri] = best;
  }
  return out;
}

ProbeReport classify(const GridField& field, const ProbeThresholds& thr) {
  check_geometry(field);
  ProbeReport rep;
  rep.gamma = thr.gamma;
  rep.gamma_floor = thr.gamma_floor;
  rep.radii = thr.radii;
  if (rep.radii.empty()) {
    double h = 0.0;
    for (int a = 0; a < field.dim(); ++a) h = std::max(h, field.cell(a));
    rep.radii = {4.0 * h, 2.0 * h, 1.0 * h};
  }
  if (rep.radii.size() < 3)
    throw std::invalid_argument("classify: need at least 3 dyadic radii");
  for (std::size_t i = 0; i + 1 < rep.radii.size(); ++i)
    if (!(rep.radii[i] > rep.radii[i + 1]))
      throw std::invalid_argument("classify: radii must decrease");

  const long long n = field.size();
  rep.labels.assign(static_cast<std::size_t>(n), NodeLabel::Lipschitz);
  for (long long k = 0; k < n; ++k) {
    std::vector<double> q = quotient_scan(field, field.unflat(k), rep.radii);
    bool usable = true;
    for (double v : q)
      if (!std::isfinite(v)) usable = false;
    if (!usable) {
      rep.labels[static_cast<std::size_t>(k)] = NodeLabel::Inconclusive;
      continue;
    }
    bool grows = true;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      const bool step = (q[i] > 0.0 && q[i + 1] >= thr.gamma * q[i]) ||
                        (q[i] == 0.0 && q[i + 1] > 0.0);
      if (!step) {
        grows = false;
        break;
      }
    }
    if (grows) {
      rep.labels[static_cast<std::size_t>(k)] = NodeLabel::NonLipschitz;
      rep.non_lipschitz.push_back(k);
      continue;
    }
    // Mean growth across the whole range catches kinks sitting between
    // nodes: the finest radius saturates there and fails the per-step test
    // even though the coarse radii still see the blow-up.
    if (q.front() > 0.0 && q.back() > 0.0) {
      const double steps = static_cast<double>(q.size() - 1);
      const double mean = std::pow(q.back() / q.front(), 1.0 / steps);
      if (mean >= thr.gamma_floor)
        rep.labels[static_cast<std::size_t>(k)] = NodeLabel::Inconclusive;
    }
  }
  return rep;
}

SetDistance compare_labels(const GridField& field, const ProbeReport& rep,
                           const std::vector<Vector>& samples) {
  SetDistance out;
  std::vector<Vector> in_box;
  for (const auto& s : samples) {
    bool inside = true;
    for (int a = 0; a < field.dim(); ++a)
      if (s[a] < field.lo[a] || s[a] > field.hi[a]) inside = false;
    if (inside) in_box.push_back(s);
  }
  std::vector<Vector> labeled;
  for (long long k : rep.non_lipschitz)
    labeled.push_back(field.node(field.unflat(k)));

  auto min_dist = [](const Vector& p, const std::vector<Vector>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : set) best = std::min(best, (p - s).norm());
    return best;
  };
  for (const auto& p : labeled)
    out.label_to_set = std::max(out.label_to_set, min_dist(p, in_box));
  for (const auto& s : in_box)
    out.set_to_label = std::max(out.set_to_label, min_dist(s, labeled));
  return out;
}

namespace {

HolderFit holder_from_values(const std::vector<double>& radii,
                             const std::vector<double>& dT) {
  std::vector<double> xs, ys, mags;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(dT[i])) continue;
    const double mag = std::abs(dT[i]);
    if (mag < 1e-14) continue;
    xs.push_back(std::log(radii[i]));
    ys.push_back(std::log(mag));
    mags.push_back(mag);
  }
  if (xs.size() < 2)
    throw std::invalid_argument("holder_fit: fewer than 2 usable radii");
  HolderFit out;
  out.fit = fit_line(xs, ys);
  out.alpha = out.fit.slope;
  // |dT| should shrink with rho; reversals flag noise-dominated data
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const bool same_order = xs[i] < xs[i + 1] ? mags[i] <= mags[i + 1] * (1 + 1e-9)
                                              : mags[i] * (1 + 1e-9) >= mags[i + 1];
    if (!same_order) out.monotone = false;
  }
  return out;
}

}  // namespace

HolderFit holder_fit(const GridField& field, const Vector& center,
                     const Vector& dir, const std::vector<double>& radii) {
  check_geometry(field);
  Vector u = dir.normalized();
  const double T0 = field.interp(center);
  std::vector<double> dT(radii.size(), kNaN);
  for (std::size_t i = 0; i < radii.size(); ++i)
    dT[i] = field.interp(center + radii[i] * u) - T0;
  return holder_from_values(radii, dT);
}

HolderFit holder_fit(const LinearSystem& sys, const Vector& center,
                     const Vector& dir, const std::vector<double>& radii,
                     double tol) {
  Vector u = dir.normalized();
  MinTimeResult base = mintime_bisection(sys, center, tol);
  MinTimeHint hint{base.T, base.zeta_star};
  std::vector<double> dT(radii.size(), kNaN);
  // ascending sweep keeps each solve warm from the previous radius
  std::vector<std::size_t> order(radii.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return radii[a] < radii[b];
  });
  for (std::size_t i : order) {
    MinTimeResult mt =
        mintime_bisection(sys, center + radii[i] * u, tol,
                          hint.T > 0 ? &hint : nullptr);
    dT[i] = mt.T - base.T;
    if (mt.converged) {
      hint.T = mt.T;
      hint.zeta = mt.zeta_star;
    }
  }
  return holder_from_values(radii, dT);
}

}  // namespace mtf
