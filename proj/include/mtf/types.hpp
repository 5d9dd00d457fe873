#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Time orientation of a flow or switching function.  Forward means the
// controlled dynamics xdot = Ax + Bu; Reversed means xdot = -Ax - Bu, the
// dynamics whose reachable sets from the origin are the sublevel sets of the
// minimum time function.
enum class Direction { Forward, Reversed };

inline double direction_sign(Direction d) {
  return d == Direction::Forward ? 1.0 : -1.0;
}

// Raised when an operation requires normality (or a nonempty singular set)
// and the system does not provide it.
class AssumptionError : public std::runtime_error {
 public:
  explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a target is not reachable in any finite horizon the solver is
// willing to explore.
class UnreachableError : public std::runtime_error {
 public:
  explicit UnreachableError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic RNG used everywhere a sampler needs randomness.
using Rng = std::mt19937_64;

inline Vector random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  double n = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

// Quasi-uniform points on the unit sphere S^{dim-1}.  dim 2 uses equal
// angles, dim 3 a Fibonacci lattice, higher dims seeded Gaussian draws.
// Deterministic for fixed (dim, n, seed).
std::vector<Vector> sphere_points(int dim, int n, std::uint64_t seed = 0);

// Least squares fit of y = slope*x + intercept; returns {slope, intercept, r2}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mtf
