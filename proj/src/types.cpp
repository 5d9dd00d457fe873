#include "mtf/types.hpp"

#include <cmath>
#include <numbers>

namespace mtf {

std::vector<Vector> sphere_points(int dim, int n, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("sphere_points: dim must be >= 1");
  if (n < 1) throw std::invalid_argument("sphere_points: n must be >= 1");
  std::vector<Vector> pts;
  pts.reserve(n);

  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      Vector v(1);
      v[0] = (i % 2 == 0) ? 1.0 : -1.0;
      pts.push_back(v);
    }
    return pts;
  }

  if (dim == 2) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double offset = unif(rng) * 2.0 * std::numbers::pi / n;
    for (int i = 0; i < n; ++i) {
      const double a = offset + 2.0 * std::numbers::pi * i / n;
      Vector v(2);
      v << std::cos(a), std::sin(a);
      pts.push_back(v);
    }
    return pts;
  }

  if (dim == 3) {
    // Fibonacci lattice; small seeded rotation so different seeds decorrelate.
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double phase = unif(rng) * 2.0 * std::numbers::pi;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i + phase;
      Vector v(3);
      v << rho * std::cos(a), rho * std::sin(a), z;
      pts.push_back(v);
    }
    return pts;
  }

  Rng rng(seed);
  for (int i = 0; i < n; ++i) pts.push_back(random_unit_vector(dim, rng));
  return pts;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300)
    throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace mtf
