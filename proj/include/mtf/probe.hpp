#pragma once
// Grid probes for Lipschitz failure of the minimum time.  The solver fills a
// rectangular field of T values; difference quotients against each node at
// shrinking dyadic radii detect the square-root blow-up that marks singular
// points, and log-log fits estimate Holder exponents along rays.

#include <cstdint>
#include <string>
#include <vector>

#include "mtf/reach.hpp"
#include "mtf/system.hpp"

namespace mtf {

struct GridField {
  Vector lo, hi;
  std::vector<int> res;             // nodes per axis, >= 2 each
  std::vector<double> values;       // row-major, last axis fastest
  std::vector<std::uint8_t> status; // 1 when the solver converged at the node
  std::string solver;
  double tol = 0.0;

  int dim() const { return static_cast<int>(res.size()); }
  long long size() const;
  double cell(int axis) const;
  long long flat(const std::vector<int>& idx) const;
  std::vector<int> unflat(long long k) const;
  Vector node(const std::vector<int>& idx) const;
  // Multilinear interpolation; the query is clamped into the box.
  double interp(const Vector& x) const;
};

// T at every node via the bisection solver, warm-started along the sweep.
// Unreachable nodes are flagged (status 0, value NaN) without aborting.
GridField eval_grid(const LinearSystem& sys, const Vector& lo, const Vector& hi,
                    const std::vector<int>& res, double tol = -1.0);

// Per radius rho: max over the fixed offset family v in {-1,0,1}^N \ {0},
// scaled so each probe lands about rho away per axis, of
// |T(node + v_scaled) - T(node)| / |step|.  The same directions at every
// radius make dyadic ratios compare like with like; a max over all nodes in
// a ball would instead be dominated by the nearest lattice shell at every
// radius and could never grow.  Radii below one cell floor to one cell.
// NaN marks radii with no usable probe (solver failures, box boundary) or a
// node the solver failed on.
std::vector<double> quotient_scan(const GridField& field,
                                  const std::vector<int>& node,
                                  const std::vector<double>& radii);

enum class NodeLabel : std::uint8_t { Lipschitz, NonLipschitz, Inconclusive };

struct ProbeThresholds {
  // Required quotient growth per radius halving.  A square-root kink grows
  // the node-centered quotient by sqrt(2) per halving, a smooth region by 1;
  // the default sits between the two.
  double gamma = 1.3;
  // A kink at distance up to half a cell from the node saturates the finest
  // radius and shows only partial growth there.  Nodes whose mean growth per
  // halving still exceeds this floor are reported inconclusive, not
  // Lipschitz.
  double gamma_floor = 1.1;
  std::vector<double> radii;  // descending dyadic; empty selects {4h, 2h, h}
};

struct ProbeReport {
  std::vector<double> radii;
  double gamma = 0.0;
  double gamma_floor = 0.0;
  std::vector<NodeLabel> labels;        // per node, field order
  std::vector<long long> non_lipschitz; // flat indices of labeled nodes
};

// A node is non-Lipschitz when its quotient grows by at least gamma at every
// halving down to the finest radius, inconclusive when the mean growth still
// exceeds gamma_floor or any radius is unusable, Lipschitz otherwise.
ProbeReport classify(const GridField& field, const ProbeThresholds& thr = {});

struct SetDistance {
  double label_to_set = 0.0;  // max over labeled nodes of distance to samples
  double set_to_label = 0.0;  // max over in-box samples of distance to labels
};

// Hausdorff-style two-sided gap between labeled nodes and a reference sample
// of the singular set.  Samples outside the box are ignored.
SetDistance compare_labels(const GridField& field, const ProbeReport& rep,
                           const std::vector<Vector>& samples);

struct HolderFit {
  double alpha = 0.0;
  LineFit fit;          // log|T(center + rho dir) - T(center)| vs log rho
  bool monotone = true; // false flags low confidence
};

// Exponent from interpolated field values; radii should stay a few cells
// above the grid spacing or interpolation smoothing biases the slope.
HolderFit holder_fit(const GridField& field, const Vector& center,
                     const Vector& dir, const std::vector<double>& radii);

// Exponent from direct solver calls, accurate at radii far below any grid.
HolderFit holder_fit(const LinearSystem& sys, const Vector& center,
                     const Vector& dir, const std::vector<double>& radii,
                     double tol = -1.0);

}  // namespace mtf
