#include "mtf/singular_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mtf/expm.hpp"
#include "mtf/reach.hpp"
#include "mtf/switching.hpp"

namespace mtf {

namespace {

// Orthonormal basis of the orthocomplement of span{b_i}: the last N - k left
// singular vectors of B.
Matrix z_complement_basis(const LinearSystem& sys) {
  Eigen::JacobiSVD<Matrix> svd(sys.B, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-12 * std::max(1.0, smax)) ++rank;
  return svd.matrixU().rightCols(sys.N - rank);
}

// Projection of zeta onto span{b_i}; its norm is the Z-membership defect.
Vector span_component(const LinearSystem& sys, const Vector& zeta) {
  Matrix U = z_complement_basis(sys);
  return zeta - U * (U.transpose() * zeta);
}

}  // namespace

std::vector<Vector> sample_Z(const LinearSystem& sys, int n,
                             std::uint64_t seed) {
  if (singular_set_is_empty(sys))
    throw AssumptionError(sys.name +
                          ": rank B = N, every costate sees some input "
                          "column, the singular set is empty");
  std::vector<Vector> out;
  if (n <= 0) return out;
  Matrix U = z_complement_basis(sys);
  const int dim = static_cast<int>(U.cols());
  if (dim == 1) {
    out.push_back(U.col(0));
    out.push_back(-U.col(0));
    return out;
  }
  for (const auto& s : sphere_points(dim, n, seed))
    out.push_back((U * s).normalized());
  return out;
}

SingularPoint singular_point(const LinearSystem& sys, const Vector& zeta_in,
                             double r) {
  require_normal(sys, "singular_point");
  if (!(r > 0.0)) throw std::invalid_argument("singular_point: need r > 0");
  if (zeta_in.size() != sys.N || zeta_in.norm() == 0.0)
    throw std::invalid_argument("singular_point: bad costate");

  Vector defect = span_component(sys, zeta_in / zeta_in.norm());
  if (defect.norm() > 1e-8) {
    std::ostringstream msg;
    msg << "singular_point: costate has component " << defect.norm()
        << " along the input span, not in Z";
    throw std::invalid_argument(msg.str());
  }
  Vector zeta = (zeta_in / zeta_in.norm() - defect).normalized();

  // Phi(-zeta) = -Phi(zeta): computing through a canonical sign and flipping
  // back makes the central symmetry hold to the last bit, not just to solver
  // tolerance.
  double flip = 1.0;
  for (int i = 0; i < sys.N; ++i) {
    if (zeta[i] != 0.0) {
      flip = zeta[i] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  zeta *= flip;

  SingularPoint p;
  p.zeta = zeta;
  p.r = r;
  p.x = Vector::Zero(sys.N);
  p.j.assign(std::max(1, sys.N - 1), 0);

  std::vector<double> zero_times;
  for (int i = 0; i < sys.M; ++i) {
    SwitchingProfile prof = find_zeros(sys, zeta, i, r, Direction::Forward);
    if (prof.identically_zero) continue;
    for (std::size_t k = 0; k + 1 < prof.interval_breaks.size(); ++k) {
      if (prof.interval_signs[k] == 0) continue;
      Vector seg = expint(sys.A, sys.B.col(i), prof.interval_breaks[k],
                          prof.interval_breaks[k + 1], Direction::Forward);
      p.x += prof.interval_signs[k] * seg;
    }
    for (const auto& z : prof.zeros) {
      int h = std::clamp(z.multiplicity, 1, std::max(1, sys.N - 1));
      ++p.j[h - 1];
      zero_times.push_back(z.time);
    }
    if (p.branch == 0) p.branch = prof.initial_sign;
  }
  p.x = expm(sys.A, -r) * p.x;

  std::sort(zero_times.begin(), zero_times.end());
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < zero_times.size(); ++k)
    min_gap = std::min(min_gap, zero_times[k + 1] - zero_times[k]);
  if (std::isfinite(min_gap) && min_gap > 0.0)
    p.d = std::min<long long>(1000000,
                              static_cast<long long>(std::ceil(1.0 / min_gap)));
  else
    p.d = 1;

  p.x *= flip;
  p.zeta *= flip;
  p.branch = static_cast<int>(flip) * p.branch;
  return p;
}

SingularResiduals verify_singular(const LinearSystem& sys,
                                  const SingularPoint& p) {
  SingularResiduals out;
  Vector zp = (expm(sys.A, p.r).transpose() * p.zeta).normalized();
  out.ham = std::abs(hamiltonian(sys, p.x, zp).value);
  Matrix Er = expm(sys.A, -p.r);
  for (int i = 0; i < sys.M; ++i)
    out.channel = std::max(out.channel, std::abs(zp.dot(Er * sys.B.col(i))));
  out.boundary = std::abs(zp.dot(p.x) - support(sys, zp, p.r));
  return out;
}

int rank_check(const LinearSystem& sys, const std::vector<double>& times,
               int channel) {
  if (times.empty()) return 0;
  Matrix K(sys.N, static_cast<int>(times.size()));
  for (int k = 0; k < K.cols(); ++k)
    K.col(k) = expm(sys.A, -times[static_cast<std::size_t>(k)]) *
               sys.B.col(channel);
  Eigen::JacobiSVD<Matrix> svd(K);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-9 * std::max(1.0, smax)) ++rank;
  return rank;
}

std::vector<Stratum> stratify_slice(const LinearSystem& sys, double tau,
                                    int n_zeta, std::uint64_t seed) {
  require_normal(sys, "stratify_slice");
  if (!(tau > 0.0)) throw std::invalid_argument("stratify_slice: need tau > 0");
  const double window = zero_window_bound(sys);
  if (tau > window * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "stratify_slice: tau = " << tau
        << " exceeds the validated zero-counting window " << window
        << "; the switch-count stratification is only meaningful below it";
    throw AssumptionError(msg.str());
  }

  std::vector<Stratum> strata;
  auto stratum_for = [&](int sw) -> Stratum& {
    for (auto& s : strata)
      if (s.switches == sw) return s;
    strata.push_back(Stratum{tau, sw, {}, {}, {}});
    return strata.back();
  };

  for (const Vector& zeta : sample_Z(sys, n_zeta, seed)) {
    SingularPoint p = singular_point(sys, zeta, tau);
    std::vector<double> times;
    for (int i = 0; i < sys.M; ++i) {
      SwitchingProfile prof = find_zeros(sys, zeta, i, tau, Direction::Forward);
      for (double t : prof.switch_times()) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    Stratum& s = stratum_for(static_cast<int>(times.size()));
    bool dup = false;
    for (const auto& q : s.points)
      if ((q.x - p.x).norm() <= 1e-7 * (1.0 + p.x.norm())) {
        dup = true;
        break;
      }
    if (dup) continue;
    s.points.push_back(std::move(p));
    s.ranks.push_back(times.empty() ? 0 : rank_check(sys, times));
    s.switch_times.push_back(std::move(times));
  }

  std::sort(strata.begin(), strata.end(),
            [](const Stratum& a, const Stratum& b) {
              return a.switches < b.switches;
            });
  return strata;
}

std::vector<SingularPoint> extend_by_invariance(const LinearSystem& sys,
                                                const SingularPoint& p,
                                                double r_max, int n_samples) {
  if (r_max < p.r * (1.0 - 1e-12))
    throw std::invalid_argument("extend_by_invariance: r_max below p.r");
  std::vector<SingularPoint> out;
  if (r_max - p.r <= 1e-12 || n_samples <= 1) {
    out.push_back(p);
    return out;
  }
  for (int k = 0; k < n_samples; ++k) {
    double r = p.r + (r_max - p.r) * k / (n_samples - 1);
    SingularPoint q = singular_point(sys, p.zeta, r);
    SingularResiduals res = verify_singular(sys, q);
    if (res.max_all() > 1e-7) {
      std::ostringstream msg;
      msg << "extend_by_invariance: verification failed at r = " << r
          << " (residual " << res.max_all() << ")";
      throw std::runtime_error(msg.str());
    }
    out.push_back(std::move(q));
  }
  return out;
}

DimensionFit box_dimension(const std::vector<Vector>& points,
                           const std::vector<double>& scales) {
  if (points.empty())
    throw std::invalid_argument("box_dimension: no points");
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (double s : scales) {
    if (!(s > 0.0))
      throw std::invalid_argument("box_dimension: scales must be positive");
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (scales.size() < 2 || smax / smin < 1.5)
    throw std::invalid_argument("box_dimension: degenerate scale range");

  DimensionFit out;
  out.scales = scales;
  std::vector<double> xs, ys;
  for (double eps : scales) {
    std::set<std::vector<long long>> cells;
    for (const auto& pt : points) {
      std::vector<long long> cell(static_cast<std::size_t>(pt.size()));
      for (int i = 0; i < pt.size(); ++i)
        cell[static_cast<std::size_t>(i)] =
            static_cast<long long>(std::floor(pt[i] / eps));
      cells.insert(std::move(cell));
    }
    out.counts.push_back(static_cast<long long>(cells.size()));
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(static_cast<double>(cells.size())));
  }
  out.fit = fit_line(xs, ys);
  out.dimension = out.fit.slope;
  return out;
}

std::vector<SingularPoint> sample_singular_set(const LinearSystem& sys,
                                               int n_zeta, int n_r,
                                               double r_min, double r_max,
                                               std::uint64_t seed) {
  if (!(r_min > 0.0) || r_max < r_min)
    throw std::invalid_argument("sample_singular_set: bad r range");
  if (n_r <= 0) return {};
  std::vector<double> rs;
  if (n_r == 1) {
    rs.push_back(r_min);
  } else {
    double ratio = r_max / r_min;
    for (int k = 0; k < n_r; ++k)
      rs.push_back(r_min * std::pow(ratio, static_cast<double>(k) / (n_r - 1)));
  }
  std::vector<SingularPoint> out;
  for (const Vector& zeta : sample_Z(sys, n_zeta, seed))
    for (double r : rs) out.push_back(singular_point(sys, zeta, r));
  return out;
}

}  // namespace mtf
