#pragma once

#include <vector>

#include "polygreen/common.hpp"
#include "polygreen/symbolic.hpp"

namespace polygreen {

/// Critical derivative order: m - (n-1)/2 for odd n, m - n/2 for even n.
int lambda_order(int m, int n);

/// Operator order m, space dimension n and the derived quantities that steer
/// every formula branch. Valid range 2 <= n <= 2m+1 (so even n always falls
/// in the logarithmic branch of the fundamental solution).
struct DimensionParams {
  int m = 0;
  int n = 0;
  int lambda = 0;
  bool odd = false;

  static DimensionParams make(int m, int n);
};

struct MultiIndex {
  std::vector<int> comps;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> c) : comps(std::move(c)) {}
  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }
  static MultiIndex unit(int dim, int axis, int order = 1) {
    MultiIndex a = zero(dim);
    a.comps[axis] = order;
    return a;
  }
  int order() const {
    int s = 0;
    for (int c : comps) s += c;
    return s;
  }
};

/// Normalization constant of the fundamental solution, derived once by the
/// distributional pairing against a reference test function (exact radial
/// moments, no surface transcription) and cached.
double cmn_constant(int m, int n);

/// Fundamental solution at x (diam is the log base in even dimensions).
double gamma_eval(const DimensionParams& params, const Point& x, double diam);

/// Symbolic form of the fundamental solution; log base bound at evaluation.
sym::RadialExpr gamma_expr(const DimensionParams& params);

/// Exact mixed partial d^alpha_x d^alpha_y Gamma(x-y) evaluated at z = x-y.
/// Derivative expressions are cached per (m, n, total multi-index).
double gamma_derivative(const DimensionParams& params, const MultiIndex& alpha_x,
                        const MultiIndex& alpha_y, const Point& x_minus_y,
                        double diam);

/// d^alpha Gamma as a symbolic expression (plain x-derivatives, no y sign).
const sym::RadialExpr& gamma_derivative_expr(const DimensionParams& params,
                                             const MultiIndex& alpha);

/// d^alpha_y Gamma(x-y) = P(z) log(diam/|z|) + Q(z) with z = x-y.
/// P is a homogeneous polynomial (identically zero for odd n), Q a
/// homogeneous radial expression; both carry degree 2m-n-|alpha|.
struct SingularDecomposition {
  sym::Poly p_alpha;
  sym::RadialExpr q_alpha;
  int homogeneity = 0;

  double eval_p(const Point& z) const { return p_alpha.eval(z); }
  double eval_q(const Point& z) const { return q_alpha.eval(z); }
  /// Reconstruct d^alpha_y Gamma(x-y) with the given log base.
  double eval(const Point& z, double log_base) const {
    double v = eval_q(z);
    if (!p_alpha.is_zero()) v += eval_p(z) * std::log(log_base / z.norm());
    return v;
  }
};

SingularDecomposition decompose_log_polynomial(const DimensionParams& params,
                                               const MultiIndex& alpha);

namespace detail {
/// Radial polynomial helpers shared with the ball-oracle calibration:
/// coefficients c[j] of sum_j c[j] r^(2j).
std::vector<double> radial_poly_bump(int p);                          // (1-r^2)^p
std::vector<double> radial_neg_laplacian_pow(std::vector<double> c, int n, int m);
double radial_poly_eval(const std::vector<double>& c, double r2);
}  // namespace detail

}  // namespace polygreen
