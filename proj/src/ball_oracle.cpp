#include "polygreen/ball_oracle.hpp"

#include <map>
#include <mutex>

namespace polygreen {

namespace {

double binom(int n, int k) {
  double b = 1;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

// F(A) = int_1^A (v^2-1)^{m-1} v^{1-n} dv, exact binomial antiderivative.
double boggio_integral_closed(int m, int n, double A) {
  double acc = 0;
  for (int k = 0; k <= m - 1; ++k) {
    double coef = binom(m - 1, k) * (((m - 1 - k) % 2) ? -1.0 : 1.0);
    int q = 2 * k + 1 - n;  // integrand power
    if (q == -1)
      acc += coef * std::log(A);
    else
      acc += coef * (std::pow(A, q + 1) - 1.0) / (q + 1);
  }
  return acc;
}

// Series in t = A-1: integrand(1+t) = t^{m-1} (2+t)^{m-1} (1+t)^{1-n}.
double boggio_integral_series(int m, int n, double A) {
  const int terms = 40;
  // Taylor coefficients of (2+t)^{m-1} (1+t)^{1-n}
  std::vector<double> c(terms, 0.0);
  {
    std::vector<double> a(terms, 0.0);  // (2+t)^{m-1}
    for (int k = 0; k <= m - 1 && k < terms; ++k)
      a[k] = binom(m - 1, k) * std::pow(2.0, m - 1 - k);
    std::vector<double> b(terms, 0.0);  // (1+t)^{1-n}, generalized binomial
    double coef = 1.0;
    for (int k = 0; k < terms; ++k) {
      b[k] = coef;
      coef *= double(1 - n - k) / double(k + 1);
    }
    for (int i = 0; i < terms; ++i)
      for (int j = 0; i + j < terms; ++j) c[i + j] += a[i] * b[j];
  }
  double t = A - 1.0;
  double acc = 0;
  double tp = std::pow(t, m);
  for (int j = 0; j < terms; ++j) {
    acc += c[j] * tp / double(m + j);
    tp *= t;
  }
  return acc;
}

double boggio_integral(int m, int n, double A) {
  if (A <= 1.0) return 0.0;
  return (A - 1.0 < 0.2) ? boggio_integral_series(m, n, A)
                         : boggio_integral_closed(m, n, A);
}

// Unit-ball formula with unit normalization constant.
double boggio_raw(int m, int n, const Point& x, const Point& y) {
  double sep2 = (x - y).norm2();
  if (sep2 == 0.0)
    throw Error(ErrorCode::coincident_points, "Green function at coincident points");
  double q = x.norm2() * y.norm2() - 2.0 * x.dot(y) + 1.0;
  double A = std::sqrt(std::max(q, 0.0) / sep2);
  double sep = std::sqrt(sep2);
  return std::pow(sep, 2 * m - n) * boggio_integral(m, n, A);
}

}  // namespace

double boggio_constant(int m, int n) {
  lambda_order(m, n);  // range check
  static std::map<std::pair<int, int>, double> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({m, n});
  if (it != cache.end()) return it->second;

  // Pairing at y = 0 against a radial test function: with k = 1 the formula
  // integrates to phi(0)/k_{m,n}. Radial reduction, composite Gauss panels
  // refined geometrically toward both endpoints.
  const int p = 2 * m + 4;
  std::vector<double> g =
      detail::radial_neg_laplacian_pow(detail::radial_poly_bump(p), n, m);
  static const double gx[16] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  static const double gw[16] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};
  auto integrand = [&](double r) {
    // r^{2m-n} F(1/r) * (-Lap)^m phi * r^{n-1}
    double G0 = std::pow(r, 2 * m - n) * boggio_integral(m, n, 1.0 / r);
    return G0 * detail::radial_poly_eval(g, r * r) * std::pow(r, n - 1);
  };
  double acc = 0;
  double b = 1.0;
  for (int panel = 0; panel < 60 && b > 1e-14; ++panel) {
    double a = b * 0.5;
    const int sub = 4;  // dyadic panels split again for the log-type kinks
    for (int s = 0; s < sub; ++s) {
      double pa = a + (b - a) * s / sub;
      double pb = a + (b - a) * (s + 1) / sub;
      for (int k = 0; k < 16; ++k) {
        double r = 0.5 * (pa + pb) + 0.5 * (pb - pa) * gx[k];
        acc += 0.5 * (pb - pa) * gw[k] * integrand(r);
      }
    }
    b = a;
  }
  double pairing = unit_sphere_area(n) * acc;  // = phi(0) / k_{m,n}
  double k = 1.0 / pairing;
  cache[{m, n}] = k;
  return k;
}

double laplace_green_ball(int n, const Point& x, const Point& y, double radius) {
  if (n != 2 && n != 3)
    throw Error(ErrorCode::dimension_out_of_range, "images formula covers n = 2, 3");
  Point xs = x * (1.0 / radius);
  Point ys = y * (1.0 / radius);
  double sep = dist(xs, ys);
  if (sep == 0.0)
    throw Error(ErrorCode::coincident_points, "Green function at coincident points");
  double k = std::sqrt(std::max(xs.norm2() * ys.norm2() - 2.0 * xs.dot(ys) + 1.0, 0.0));
  double g1;
  if (n == 2)
    g1 = std::log(k / sep) / (2.0 * kPi);
  else
    g1 = (1.0 / sep - 1.0 / k) / (4.0 * kPi);
  return std::pow(radius, 2 - n) * g1;
}

double boggio_green_ball(int m, int n, const Point& x, const Point& y, double radius) {
  Point xs = x * (1.0 / radius);
  Point ys = y * (1.0 / radius);
  return std::pow(radius, 2 * m - n) * boggio_constant(m, n) * boggio_raw(m, n, xs, ys);
}

BallOracle BallOracle::make(int m, int n, double radius) {
  lambda_order(m, n);
  if (radius <= 0) throw Error(ErrorCode::config_invalid, "oracle radius must be positive");
  return BallOracle{m, n, radius};
}

double BallOracle::green(const Point& x, const Point& y) const {
  if (m == 1) return laplace_green_ball(n, x, y, radius);
  return boggio_green_ball(m, n, x, y, radius);
}

OracleCompareReport oracle_compare(const DiscreteField& numeric, const BallOracle& oracle,
                                   const Point& y, double exclusion) {
  const GridSpec& g = numeric.grid();
  OracleCompareReport rep;
  double err2 = 0, ref2 = 0;
  const auto& coords = g.interior_coords();
  for (long i = 0; i < g.num_interior(); ++i) {
    Point x = g.node_point(coords[i]);
    double sep = dist(x, y);
    if (sep < exclusion) continue;
    if (g.domain().distance_to_boundary(x) < exclusion) continue;
    double ref = oracle.green(x, y);
    double err = std::abs(numeric.values()[i] - ref);
    ++rep.nodes_compared;
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    rep.sup_field = std::max(rep.sup_field, std::abs(ref));
    err2 += err * err;
    ref2 += ref * ref;
    if (ref != 0.0)
      rep.worst_pointwise_ratio = std::max(rep.worst_pointwise_ratio, err / std::abs(ref));
  }
  if (rep.nodes_compared > 0 && rep.sup_field > 0) {
    rep.max_error_rel_sup = rep.max_abs_error / rep.sup_field;
    rep.l2_error_rel = std::sqrt(err2 / ref2);
  }
  return rep;
}

}  // namespace polygreen
