#include "polygreen/fundamental.hpp"

#include <map>
#include <mutex>

namespace polygreen {

int lambda_order(int m, int n) {
  if (n < 2 || n > 2 * m + 1)
    throw Error(ErrorCode::dimension_out_of_range,
                "dimension n=" + std::to_string(n) + " outside [2, " +
                    std::to_string(2 * m + 1) + "] for m=" + std::to_string(m));
  return (n % 2 == 1) ? m - (n - 1) / 2 : m - n / 2;
}

DimensionParams DimensionParams::make(int m, int n) {
  DimensionParams p;
  p.m = m;
  p.n = n;
  p.lambda = lambda_order(m, n);
  p.odd = (n % 2 == 1);
  return p;
}

namespace detail {

std::vector<double> radial_poly_bump(int p) {
  // binomial expansion of (1 - t)^p in t = r^2
  std::vector<double> c(p + 1);
  double b = 1.0;
  for (int k = 0; k <= p; ++k) {
    c[k] = ((k % 2) ? -b : b);
    b = b * (p - k) / (k + 1);
  }
  return c;
}

std::vector<double> radial_neg_laplacian_pow(std::vector<double> c, int n, int m) {
  for (int rep = 0; rep < m; ++rep) {
    std::vector<double> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (int j = 1; j < int(c.size()); ++j)
      d[j - 1] = -c[j] * 2.0 * j * (2.0 * j + n - 2.0);
    c = std::move(d);
  }
  return c;
}

double radial_poly_eval(const std::vector<double>& c, double r2) {
  double s = 0;
  for (int j = int(c.size()) - 1; j >= 0; --j) s = s * r2 + c[j];
  return s;
}

}  // namespace detail

double cmn_constant(int m, int n) {
  lambda_order(m, n);  // range check
  static std::map<std::pair<int, int>, double> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({m, n});
  if (it != cache.end()) return it->second;

  // Pairing of |x|^{2m-n} (times log(1/|x|) for even n) against
  // (-Lap)^m (1-|x|^2)^p over the unit ball. The integrand reduces to exact
  // radial moments: for odd n  int_0^1 r^{2j+2m-1} dr = 1/(2j+2m),
  // for even n int_0^1 r^{2j+2m-1} log(1/r) dr = 1/(2j+2m)^2.
  // The log(diam) part of the even branch pairs to zero because |x|^{2m-n}
  // is then a polynomial of degree < 2m.
  const int p = 2 * m + 4;
  std::vector<double> g =
      detail::radial_neg_laplacian_pow(detail::radial_poly_bump(p), n, m);
  double sum = 0;
  for (int j = 0; j < int(g.size()); ++j) {
    double q = 2.0 * j + 2.0 * m;
    sum += (n % 2 == 1) ? g[j] / q : g[j] / (q * q);
  }
  double pairing = unit_sphere_area(n) * sum;  // = phi(0) / C_{m,n}
  double c = 1.0 / pairing;
  cache[{m, n}] = c;
  return c;
}

sym::RadialExpr gamma_expr(const DimensionParams& params) {
  const bool with_log = !params.odd;
  return sym::RadialExpr::radial_power(params.n, cmn_constant(params.m, params.n),
                                       2 * params.m - params.n, with_log);
}

double gamma_eval(const DimensionParams& params, const Point& x, double diam) {
  double r = x.norm();
  if (r == 0.0) throw Error(ErrorCode::singular_point, "fundamental solution at x = 0");
  double c = cmn_constant(params.m, params.n);
  double v = c * std::pow(r, 2 * params.m - params.n);
  if (!params.odd) {
    if (diam <= 0.0)
      throw Error(ErrorCode::config_invalid, "diam must be positive in even dimensions");
    v *= std::log(diam / r);
  }
  return v;
}

namespace {

struct DerivKey {
  int m, n;
  std::vector<int> alpha;
  bool operator<(const DerivKey& o) const {
    if (m != o.m) return m < o.m;
    if (n != o.n) return n < o.n;
    return alpha < o.alpha;
  }
};

}  // namespace

const sym::RadialExpr& gamma_derivative_expr(const DimensionParams& params,
                                             const MultiIndex& alpha) {
  static std::map<DerivKey, sym::RadialExpr> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  DerivKey key{params.m, params.n, alpha.comps};
  key.alpha.resize(params.n, 0);
  auto it = cache.find(key);
  if (it == cache.end()) {
    sym::RadialExpr e = gamma_expr(params).derivative(key.alpha);
    it = cache.emplace(std::move(key), std::move(e)).first;
  }
  return it->second;
}

double gamma_derivative(const DimensionParams& params, const MultiIndex& alpha_x,
                        const MultiIndex& alpha_y, const Point& x_minus_y,
                        double diam) {
  if (x_minus_y.norm() == 0.0)
    throw Error(ErrorCode::singular_point, "fundamental solution derivative at x = y");
  if (alpha_x.order() + alpha_y.order() > 2 * params.m)
    throw Error(ErrorCode::spec_mismatch, "derivative order exceeds 2m");
  MultiIndex total = MultiIndex::zero(params.n);
  for (int i = 0; i < int(alpha_x.comps.size()); ++i) total.comps[i] += alpha_x.comps[i];
  for (int i = 0; i < int(alpha_y.comps.size()); ++i) total.comps[i] += alpha_y.comps[i];
  double sign = (alpha_y.order() % 2) ? -1.0 : 1.0;
  sym::EvalContext ctx;
  ctx.log_base = diam;
  return sign * gamma_derivative_expr(params, total).eval(x_minus_y, ctx);
}

SingularDecomposition decompose_log_polynomial(const DimensionParams& params,
                                               const MultiIndex& alpha) {
  if (alpha.order() > params.lambda)
    throw Error(ErrorCode::spec_mismatch, "multi-index order exceeds critical order");
  const sym::RadialExpr& dgamma = gamma_derivative_expr(params, alpha);
  double sign = (alpha.order() % 2) ? -1.0 : 1.0;
  sym::RadialExpr log_part(params.n), rest(params.n);
  dgamma.scaled(sign).split_log(log_part, rest);
  SingularDecomposition dec;
  dec.homogeneity = 2 * params.m - params.n - alpha.order();
  dec.p_alpha = log_part.as_polynomial();
  dec.q_alpha = rest;
  return dec;
}

}  // namespace polygreen
