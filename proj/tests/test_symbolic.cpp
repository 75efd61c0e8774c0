#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polygreen/jet.hpp"
#include "polygreen/rng.hpp"
#include "polygreen/symbolic.hpp"

using namespace polygreen;
using namespace polygreen::sym;

namespace {

// central finite difference of an expression, for cross-checking the
// symbolic derivative path
double fd_derivative(const RadialExpr& e, const Point& z, int axis, double step,
                     const EvalContext& ctx) {
  Point zp = z, zm = z;
  zp[axis] += step;
  zm[axis] -= step;
  return (e.eval(zp, ctx) - e.eval(zm, ctx)) / (2.0 * step);
}

}  // namespace

TEST_CASE("polynomial arithmetic") {
  Poly x = Poly::variable(2, 0);
  Poly y = Poly::variable(2, 1);
  Poly p = (x * x) + y.scaled(3.0) + Poly::constant(2, -1.0);
  Point z{2.0, 5.0};
  CHECK(p.eval(z) == doctest::Approx(4.0 + 15.0 - 1.0));
  CHECK(p.degree() == 2);
  CHECK(p.derivative(0).eval(z) == doctest::Approx(4.0));
  CHECK(p.derivative(1).eval(z) == doctest::Approx(3.0));
  CHECK(p.times_r2().eval(z) == doctest::Approx(p.eval(z) * 29.0));
}

TEST_CASE("radial power derivatives match finite differences") {
  CounterRng rng(11, 0);
  for (int n : {2, 3}) {
    for (bool logf : {false, true}) {
      RadialExpr e = RadialExpr::radial_power(n, 1.7, 3 - n, logf);
      EvalContext ctx;
      ctx.log_base = 2.0;
      for (int trial = 0; trial < 20; ++trial) {
        Point z(n);
        for (int d = 0; d < n; ++d) z[d] = rng.uniform(-1.0, 1.0);
        if (z.norm() < 0.3) continue;
        int axis = int(rng.next_below(n));
        double sym_val = e.derivative(axis).eval(z, ctx);
        double fd = fd_derivative(e, z, axis, 1e-6, ctx);
        CHECK(sym_val == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("second derivatives and laplacian") {
  // Lap |z|^{-1} = 0 in 3D away from the origin
  RadialExpr e = RadialExpr::radial_power(3, 1.0, -1, false);
  RadialExpr lap = e.laplacian();
  EvalContext ctx;
  Point z{0.4, -0.3, 0.8};
  CHECK(std::abs(lap.eval(z, ctx)) < 1e-12);

  // Lap log(1/|z|) = 0 in 2D
  RadialExpr e2 = RadialExpr::radial_power(2, 1.0, 0, true);
  ctx.log_base = 1.0;
  Point w{0.5, -0.2};
  CHECK(std::abs(e2.laplacian().eval(w, ctx)) < 1e-12);

  // Lap^2 (|z|^2 log) = 0 in 2D away from 0
  RadialExpr e3 = RadialExpr::radial_power(2, 1.0, 2, true);
  CHECK(std::abs(e3.neg_laplacian_pow(2).eval(w, ctx)) < 1e-10);
}

TEST_CASE("cutoff profile: plateau, support, smooth transition") {
  CutoffProfile psi(0.25, 0.5);
  CHECK(psi.value(0.1) == 1.0);
  CHECK(psi.value(0.25) == 1.0);
  CHECK(psi.value(0.5) == 0.0);
  CHECK(psi.value(0.7) == 0.0);
  for (int k = 1; k <= 6; ++k) {
    CHECK(psi.deriv(k, 0.2) == 0.0);
    CHECK(psi.deriv(k, 0.6) == 0.0);
  }
  // interior smoothness: jet derivatives match finite differences of values
  for (double r : {0.3, 0.375, 0.45}) {
    double h = 1e-5;
    double fd1 = (psi.value(r + h) - psi.value(r - h)) / (2 * h);
    CHECK(psi.deriv(1, r) == doctest::Approx(fd1).epsilon(1e-6));
    double fd2 = (psi.value(r + h) - 2 * psi.value(r) + psi.value(r - h)) / (h * h);
    CHECK(psi.deriv(2, r) == doctest::Approx(fd2).epsilon(1e-4));
  }
  // monotone decreasing transition
  CHECK(psi.value(0.3) > psi.value(0.4));
}

TEST_CASE("cutoff factor differentiation inside expressions") {
  // d/dz_i of psi(|z|/s): check against finite differences with s = 2
  RadialExpr eta = RadialExpr::cutoff(3);
  CutoffProfile psi(0.25, 0.5);
  EvalContext ctx;
  ctx.profile = &psi;
  ctx.cut_scale = 2.0;
  CounterRng rng(5, 3);
  for (int trial = 0; trial < 10; ++trial) {
    Point z(3);
    for (int d = 0; d < 3; ++d) z[d] = rng.uniform(-1.0, 1.0);
    double r = z.norm();
    if (r < 0.55 || r > 0.95) continue;  // stay inside the scaled transition
    int axis = int(rng.next_below(3));
    double sym_val = eta.derivative(axis).eval(z, ctx);
    double fd = fd_derivative(eta, z, axis, 1e-6, ctx);
    CHECK(sym_val == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("product rule with cutoff times singular model") {
  RadialExpr eta = RadialExpr::cutoff(3);
  RadialExpr gam = RadialExpr::radial_power(3, 1.0, -1, false);
  RadialExpr prod = eta * gam;
  CutoffProfile psi(0.25, 0.5);
  EvalContext ctx;
  ctx.profile = &psi;
  ctx.cut_scale = 1.0;
  Point z{0.2, 0.2, 0.1};  // inside the transition band
  double expect = psi.value(z.norm()) / z.norm();
  CHECK(prod.eval(z, ctx) == doctest::Approx(expect).epsilon(1e-12));
  double sym_val = prod.derivative(1).eval(z, ctx);
  double fd = fd_derivative(prod, z, 1, 1e-6, ctx);
  CHECK(sym_val == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("jet exponential") {
  Jet<6> t = Jet<6>::variable(0.3);
  Jet<6> e = jet_exp(t);
  for (int k = 0; k <= 6; ++k)
    CHECK(e.deriv(k) == doctest::Approx(std::exp(0.3)).epsilon(1e-12));
}
