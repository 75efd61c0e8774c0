#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "polygreen/common.hpp"
#include "polygreen/jet.hpp"

namespace polygreen::sym {

/// Exponent vector of a monomial; dimensions beyond the active one stay 0.
using Mono = std::array<uint8_t, Point::kMaxDim>;

/// Sparse multivariate polynomial with double coefficients. Degrees stay
/// small (a handful of symbolic differentiations), so a map is plenty.
class Poly {
 public:
  explicit Poly(int dim = 0) : dim_(dim) {}

  static Poly constant(int dim, double c) {
    Poly p(dim);
    if (c != 0.0) p.terms_[Mono{}] = c;
    return p;
  }
  static Poly variable(int dim, int axis, double c = 1.0) {
    Poly p(dim);
    Mono m{};
    m[axis] = 1;
    p.terms_[m] = c;
    return p;
  }

  int dim() const { return dim_; }
  bool is_zero(double tol = 0.0) const {
    for (auto& [m, c] : terms_)
      if (std::abs(c) > tol) return false;
    return true;
  }
  int degree() const {
    int d = -1;
    for (auto& [m, c] : terms_) {
      if (c == 0.0) continue;
      int s = 0;
      for (int i = 0; i < dim_; ++i) s += m[i];
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(const Mono& m, double c) {
    if (c == 0.0) return;
    auto it = terms_.find(m);
    if (it == terms_.end())
      terms_[m] = c;
    else if ((it->second += c) == 0.0)
      terms_.erase(it);
  }

  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r(dim_);
    for (auto& [ma, ca] : terms_)
      for (auto& [mb, cb] : o.terms_) {
        Mono m{};
        for (int i = 0; i < dim_; ++i) m[i] = uint8_t(ma[i] + mb[i]);
        r.add_term(m, ca * cb);
      }
    return r;
  }
  Poly scaled(double s) const {
    Poly r(dim_);
    for (auto& [m, c] : terms_) r.add_term(m, c * s);
    return r;
  }
  /// d/dz_axis.
  Poly derivative(int axis) const {
    Poly r(dim_);
    for (auto& [m, c] : terms_) {
      if (m[axis] == 0) continue;
      Mono d = m;
      d[axis] -= 1;
      r.add_term(d, c * m[axis]);
    }
    return r;
  }
  /// multiply by z_axis.
  Poly times_var(int axis) const {
    Poly r(dim_);
    for (auto& [m, c] : terms_) {
      Mono d = m;
      d[axis] += 1;
      r.add_term(d, c);
    }
    return r;
  }
  /// multiply by |z|^2 expanded into the polynomial ring.
  Poly times_r2() const {
    Poly r(dim_);
    for (int a = 0; a < dim_; ++a)
      for (auto& [m, c] : terms_) {
        Mono d = m;
        d[a] += 2;
        r.add_term(d, c);
      }
    return r;
  }

  double eval(const Point& z) const {
    double s = 0;
    for (auto& [m, c] : terms_) {
      double t = c;
      for (int i = 0; i < dim_; ++i)
        for (int e = 0; e < m[i]; ++e) t *= z[i];
      s += t;
    }
    return s;
  }

  const std::map<Mono, double>& terms() const { return terms_; }

 private:
  int dim_;
  std::map<Mono, double> terms_;
};

/// Radial bump profile: 1 on [0, r_plateau], 0 on [r_support, inf), smooth
/// exponential transition between. Derivatives come from Taylor-jet
/// arithmetic, exact to roundoff.
class CutoffProfile {
 public:
  static constexpr int kMaxDeriv = 10;

  CutoffProfile(double r_plateau = 0.25, double r_support = 0.5)
      : r0_(r_plateau), r1_(r_support) {}

  double r_plateau() const { return r0_; }
  double r_support() const { return r1_; }

  double value(double r) const { return deriv(0, r); }

  /// k-th derivative with respect to r.
  double deriv(int k, double r) const {
    assert(k <= kMaxDeriv);
    if (r <= r0_) return k == 0 ? 1.0 : 0.0;
    if (r >= r1_) return 0.0;
    const double w = r1_ - r0_;
    double t = (r - r0_) / w;
    Jet<kMaxDeriv> tt = Jet<kMaxDeriv>::variable(t);
    Jet<kMaxDeriv> b = bump(tt);
    // chain rule for the affine substitution
    return b.deriv(k) * std::pow(1.0 / w, k);
  }

 private:
  // f(s) = exp(-1/s) continued by 0 for s <= 0
  static Jet<kMaxDeriv> f(const Jet<kMaxDeriv>& s) {
    if (s.c[0] <= 0.0) return Jet<kMaxDeriv>{};
    Jet<kMaxDeriv> inv = Jet<kMaxDeriv>::constant(-1.0) / s;
    return jet_exp(inv);
  }
  // bump(t) = f(1-t) / (f(t) + f(1-t)): 1 at t=0, 0 at t=1
  static Jet<kMaxDeriv> bump(const Jet<kMaxDeriv>& t) {
    Jet<kMaxDeriv> one = Jet<kMaxDeriv>::constant(1.0);
    Jet<kMaxDeriv> a = f(one - t);
    Jet<kMaxDeriv> b = f(t);
    return a / (a + b);
  }

  double r0_, r1_;
};

/// Evaluation context for a RadialExpr: base of log factors and the scale
/// fed to the cutoff profile (both are run-time quantities like diam or d(y)).
struct EvalContext {
  double log_base = 1.0;
  const CutoffProfile* profile = nullptr;
  double cut_scale = 1.0;
};

/// One term P(z) * |z|^rpow * log(base/|z|)^logf * psi^(cut)(|z|/s) * s^-sinv.
struct RadialTerm {
  Poly p;
  int rpow = 0;
  int logf = 0;   // 0 or 1
  int cut = -1;   // -1: no cutoff factor; k >= 0: k-th profile derivative
  int sinv = 0;   // accumulated 1/s powers from differentiating psi(|z|/s)
};

/// Closed differentiation algebra for the radial expressions this project
/// needs: derivatives of |z|^a and |z|^a log(base/|z|), optionally multiplied
/// by a scaled radial cutoff. Exact symbolic differentiation; evaluation
/// binds the log base and cutoff scale.
class RadialExpr {
 public:
  explicit RadialExpr(int dim = 0) : dim_(dim) {}

  static RadialExpr radial_power(int dim, double coeff, int rpow, bool with_log) {
    RadialExpr e(dim);
    RadialTerm t;
    t.p = Poly::constant(dim, coeff);
    t.rpow = rpow;
    t.logf = with_log ? 1 : 0;
    e.terms_.push_back(std::move(t));
    return e;
  }

  /// psi(|z|/s) as an expression (s bound at evaluation).
  static RadialExpr cutoff(int dim) {
    RadialExpr e(dim);
    RadialTerm t;
    t.p = Poly::constant(dim, 1.0);
    t.cut = 0;
    e.terms_.push_back(std::move(t));
    return e;
  }

  int dim() const { return dim_; }
  const std::vector<RadialTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  RadialExpr derivative(int axis) const {
    RadialExpr r(dim_);
    for (const auto& t : terms_) {
      // product rule over the four factors
      RadialTerm a;  // polynomial factor
      a.p = t.p.derivative(axis);
      a.rpow = t.rpow;
      a.logf = t.logf;
      a.cut = t.cut;
      a.sinv = t.sinv;
      if (!a.p.is_zero()) r.terms_.push_back(std::move(a));

      if (t.rpow != 0) {  // |z|^b -> b z_i |z|^{b-2}
        RadialTerm b;
        b.p = t.p.times_var(axis).scaled(double(t.rpow));
        b.rpow = t.rpow - 2;
        b.logf = t.logf;
        b.cut = t.cut;
        b.sinv = t.sinv;
        r.terms_.push_back(std::move(b));
      }
      if (t.logf == 1) {  // log(base/|z|) -> -z_i |z|^{-2}
        RadialTerm c;
        c.p = t.p.times_var(axis).scaled(-1.0);
        c.rpow = t.rpow - 2;
        c.logf = 0;
        c.cut = t.cut;
        c.sinv = t.sinv;
        r.terms_.push_back(std::move(c));
      }
      if (t.cut >= 0) {  // psi^(k)(|z|/s) -> (z_i/(s|z|)) psi^(k+1)
        RadialTerm d;
        d.p = t.p.times_var(axis);
        d.rpow = t.rpow - 1;
        d.logf = t.logf;
        d.cut = t.cut + 1;
        d.sinv = t.sinv + 1;
        r.terms_.push_back(std::move(d));
      }
    }
    r.normalize();
    return r;
  }

  RadialExpr derivative(const std::vector<int>& multi) const {
    RadialExpr r = *this;
    for (int axis = 0; axis < int(multi.size()); ++axis)
      for (int k = 0; k < multi[axis]; ++k) r = r.derivative(axis);
    return r;
  }

  RadialExpr laplacian() const {
    RadialExpr r(dim_);
    for (int axis = 0; axis < dim_; ++axis) {
      RadialExpr dd = derivative(axis).derivative(axis);
      for (auto& t : dd.terms_) r.terms_.push_back(std::move(t));
    }
    r.normalize();
    return r;
  }

  /// (-Laplacian)^m applied symbolically.
  RadialExpr neg_laplacian_pow(int m) const {
    RadialExpr r = *this;
    for (int k = 0; k < m; ++k) r = r.laplacian().scaled(-1.0);
    return r;
  }

  RadialExpr operator+(const RadialExpr& o) const {
    RadialExpr r = *this;
    for (const auto& t : o.terms_) r.terms_.push_back(t);
    r.normalize();
    return r;
  }

  /// Product, valid while no factor pair would need log^2 or two cutoffs.
  RadialExpr operator*(const RadialExpr& o) const {
    RadialExpr r(dim_);
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        assert(a.logf + b.logf <= 1);
        assert(a.cut < 0 || b.cut < 0);
        RadialTerm t;
        t.p = a.p * b.p;
        t.rpow = a.rpow + b.rpow;
        t.logf = a.logf + b.logf;
        t.cut = std::max(a.cut, b.cut);
        t.sinv = a.sinv + b.sinv;
        r.terms_.push_back(std::move(t));
      }
    r.normalize();
    return r;
  }

  RadialExpr scaled(double s) const {
    RadialExpr r(dim_);
    for (const auto& t : terms_) {
      RadialTerm u = t;
      u.p = u.p.scaled(s);
      r.terms_.push_back(std::move(u));
    }
    return r;
  }

  double eval(const Point& z, const EvalContext& ctx = EvalContext{}) const {
    double r = z.norm();
    if (r == 0.0) throw Error(ErrorCode::singular_point, "radial expression evaluated at 0");
    double s = 0;
    for (const auto& t : terms_) {
      double v = t.p.eval(z);
      if (v == 0.0) continue;
      if (t.rpow != 0) v *= std::pow(r, t.rpow);
      if (t.logf) v *= std::log(ctx.log_base / r);
      if (t.cut >= 0) {
        v *= ctx.profile->deriv(t.cut, r / ctx.cut_scale);
        if (t.sinv) v *= std::pow(ctx.cut_scale, -t.sinv);
      }
      s += v;
    }
    return s;
  }

  /// Split into (log part, rest): this = part1 * log(base/|z|) + part2.
  void split_log(RadialExpr& log_part, RadialExpr& rest) const {
    log_part = RadialExpr(dim_);
    rest = RadialExpr(dim_);
    for (const auto& t : terms_) {
      RadialTerm u = t;
      if (t.logf) {
        u.logf = 0;
        log_part.terms_.push_back(std::move(u));
      } else {
        rest.terms_.push_back(std::move(u));
      }
    }
  }

  /// Collapse terms with even nonnegative radial power into the polynomial
  /// ring. Throws if an odd or negative power remains (call only where the
  /// expression is genuinely polynomial, e.g. log parts of derivatives of
  /// even-dimension fundamental solutions).
  Poly as_polynomial() const {
    Poly out(dim_);
    for (const auto& t : terms_) {
      if (t.cut >= 0 || t.logf)
        throw Error(ErrorCode::spec_mismatch, "expression is not a bare polynomial");
      if (t.rpow < 0 || t.rpow % 2 != 0)
        throw Error(ErrorCode::spec_mismatch, "radial power is not polynomial");
      Poly q = t.p;
      for (int k = 0; k < t.rpow / 2; ++k) q = q.times_r2();
      out = out + q;
    }
    return out;
  }

  void normalize() {
    // merge terms sharing (rpow, logf, cut, sinv)
    std::map<std::array<int, 4>, Poly> merged;
    for (auto& t : terms_) {
      std::array<int, 4> key{t.rpow, t.logf, t.cut, t.sinv};
      auto it = merged.find(key);
      if (it == merged.end())
        merged.emplace(key, t.p);
      else
        it->second = it->second + t.p;
    }
    terms_.clear();
    for (auto& [key, p] : merged) {
      if (p.is_zero()) continue;
      RadialTerm t;
      t.p = std::move(p);
      t.rpow = key[0];
      t.logf = key[1];
      t.cut = key[2];
      t.sinv = key[3];
      terms_.push_back(std::move(t));
    }
  }

 private:
  int dim_;
  std::vector<RadialTerm> terms_;
};

}  // namespace polygreen::sym
