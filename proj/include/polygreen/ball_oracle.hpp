#pragma once

#include "polygreen/solver.hpp"

namespace polygreen {

/// Closed-form Green functions in balls, the independent ground truth for
/// the discrete solver.
struct BallOracle {
  int m = 1;
  int n = 3;
  double radius = 1.0;

  static BallOracle make(int m, int n, double radius = 1.0);

  double green(const Point& x, const Point& y) const;
};

/// Method of images, m = 1, unit-radius scaling handled internally.
/// n = 2: (1/2pi) log(k/|x-y|), n = 3: (1/4pi)(1/|x-y| - 1/k) with
/// k = sqrt(|x|^2 |y|^2 - 2 x.y + R-scaled terms); vanishes on the boundary
/// and is symmetric, including the y -> 0 limit.
double laplace_green_ball(int n, const Point& x, const Point& y, double radius = 1.0);

/// Polyharmonic ball Green function
///   k_{m,n} |x-y|^{2m-n} int_1^{A} (v^2-1)^{m-1} v^{1-n} dv,
///   A = sqrt(|x|^2 |y|^2 - 2 x.y + 1) / |x-y|   (unit ball),
/// with k_{m,n} calibrated so the distributional pairing reproduces the
/// point source. The 1D integral is evaluated in closed form, switching to a
/// series near A = 1 where the closed form cancels.
double boggio_green_ball(int m, int n, const Point& x, const Point& y,
                         double radius = 1.0);

/// Calibrated normalization constant of the unit-ball formula.
double boggio_constant(int m, int n);

struct OracleCompareReport {
  long nodes_compared = 0;
  double max_abs_error = 0;
  double sup_field = 0;           // sup |oracle| over compared nodes
  double max_error_rel_sup = 0;   // max |err| / sup |oracle|
  double l2_error_rel = 0;        // ||err||_2 / ||oracle||_2
  double worst_pointwise_ratio = 0;
};

/// Compare a discrete Green column against the oracle on nodes with
/// separation and boundary distance at least `exclusion`. Errors are
/// reported relative to the oracle field scale on the compared set.
OracleCompareReport oracle_compare(const DiscreteField& numeric, const BallOracle& oracle,
                                   const Point& y, double exclusion);

}  // namespace polygreen
