#include "polygreen/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace polygreen {

std::string bound_target_name(BoundTarget t) {
  switch (t) {
    case BoundTarget::green_odd_high: return "green-odd-high";
    case BoundTarget::green_odd_low: return "green-odd-low";
    case BoundTarget::green_even: return "green-even";
    case BoundTarget::regular_odd_high: return "regular-odd-high";
    case BoundTarget::regular_odd_low: return "regular-odd-low";
    case BoundTarget::regular_even: return "regular-even";
  }
  return "?";
}

BoundTarget bound_target_from_name(const std::string& name) {
  for (BoundTarget t :
       {BoundTarget::green_odd_high, BoundTarget::green_odd_low, BoundTarget::green_even,
        BoundTarget::regular_odd_high, BoundTarget::regular_odd_low,
        BoundTarget::regular_even})
    if (bound_target_name(t) == name) return t;
  throw Error(ErrorCode::config_invalid, "unknown bound target '" + name + "'");
}

bool bound_target_is_regular(BoundTarget t) {
  return t == BoundTarget::regular_odd_high || t == BoundTarget::regular_odd_low ||
         t == BoundTarget::regular_even;
}

std::string BoundSpec::label() const {
  return bound_target_name(target) + "_i" + std::to_string(i) + "_j" + std::to_string(j);
}

void BoundSpec::validate(const DimensionParams& params) const {
  const int lam = params.lambda;
  const bool even_target =
      target == BoundTarget::green_even || target == BoundTarget::regular_even;
  if (even_target == params.odd)
    throw Error(ErrorCode::spec_mismatch,
                "bound target '" + bound_target_name(target) + "' requires " +
                    (even_target ? "even" : "odd") + " dimension, got n=" +
                    std::to_string(params.n));
  if (i < 0 || j < 0 || i > lam || j > lam)
    throw Error(ErrorCode::spec_mismatch,
                "derivative orders must lie in 0..lambda = 0.." + std::to_string(lam) +
                    " (got i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")");
  const int crossover = 2 * params.m - params.n;
  const bool high = target == BoundTarget::green_odd_high ||
                    target == BoundTarget::regular_odd_high;
  const bool low =
      target == BoundTarget::green_odd_low || target == BoundTarget::regular_odd_low;
  if (high && i + j < crossover)
    throw Error(ErrorCode::spec_mismatch,
                "high-order form needs i+j >= 2m-n = " + std::to_string(crossover));
  if (low && i + j > crossover)
    throw Error(ErrorCode::spec_mismatch,
                "low-order form needs i+j <= 2m-n = " + std::to_string(crossover));
}

std::vector<BoundSpec> admissible_bound_specs(const DimensionParams& params, bool regular,
                                              int cap) {
  const int top = cap < 0 ? params.lambda : std::min(cap, params.lambda);
  std::vector<BoundSpec> out;
  for (int i = 0; i <= top; ++i)
    for (int j = 0; j <= top; ++j) {
      if (params.odd) {
        if (i + j >= 2 * params.m - params.n)
          out.push_back({regular ? BoundTarget::regular_odd_high
                                 : BoundTarget::green_odd_high,
                         i, j});
        if (i + j <= 2 * params.m - params.n)
          out.push_back(
              {regular ? BoundTarget::regular_odd_low : BoundTarget::green_odd_low, i,
               j});
      } else {
        out.push_back(
            {regular ? BoundTarget::regular_even : BoundTarget::green_even, i, j});
      }
    }
  return out;
}

namespace {

double distance_prefactor(const DimensionParams& params, const BoundSpec& spec,
                          const SamplePair& pair) {
  const int lam = params.lambda;
  double a = std::pow(pair.d_x / pair.sep, double(lam - spec.i));
  double b = std::pow(pair.d_y / pair.sep, double(lam - spec.j));
  return std::min({1.0, a, b});
}

double near_factor(const SamplePair& pair) {
  return std::min({pair.sep / pair.d_x, pair.sep / pair.d_y, 1.0});
}

}  // namespace

double bound_rhs_green(const BoundSpec& spec, const DimensionParams& params,
                       const SamplePair& pair) {
  spec.validate(params);
  if (bound_target_is_regular(spec.target))
    throw Error(ErrorCode::spec_mismatch, "regular-part target passed to the Green form");
  if (pair.sep <= 0) throw Error(ErrorCode::spec_mismatch, "separation must be positive");
  const double e = double(params.n - 2 * params.m + spec.i + spec.j);
  double v = distance_prefactor(params, spec, pair) * std::pow(pair.sep, -e);
  if (spec.target == BoundTarget::green_odd_high) return v;
  v *= std::pow(near_factor(pair), e);
  if (spec.target == BoundTarget::green_even)
    v *= std::log1p(std::min(pair.d_x, pair.d_y) / pair.sep);
  return v;
}

double bound_rhs_regular(const BoundSpec& spec, const DimensionParams& params,
                         const SamplePair& pair, double diam) {
  spec.validate(params);
  if (!bound_target_is_regular(spec.target))
    throw Error(ErrorCode::spec_mismatch, "Green target passed to the regular-part form");
  if (pair.sep <= 0) throw Error(ErrorCode::spec_mismatch, "separation must be positive");
  const double e = double(params.n - 2 * params.m + spec.i + spec.j);
  if (spec.target == BoundTarget::regular_odd_high)
    return std::pow(std::max({pair.d_x, pair.d_y, pair.sep}), -e);
  double v = std::pow(pair.sep, -e) * std::pow(near_factor(pair), e);
  if (spec.target == BoundTarget::regular_even) {
    if (diam <= 0) throw Error(ErrorCode::spec_mismatch, "diam must be positive");
    v *= std::log1p(diam / std::max({pair.d_x, pair.d_y, pair.sep}));
  }
  return v;
}

CutoffFunction CutoffFunction::make(int m) {
  CutoffFunction c;
  c.profile = sym::CutoffProfile(0.25, 0.5);
  c.deriv_sup.assign(2 * m + 1, 0.0);
  // sup over the transition interval by dense sampling
  for (int k = 0; k <= 2 * m; ++k) {
    double sup = (k == 0) ? 1.0 : 0.0;
    for (int s = 1; s < 2000; ++s) {
      double r = 0.25 + 0.25 * s / 2000.0;
      sup = std::max(sup, std::abs(c.profile.deriv(k, r)));
    }
    c.deriv_sup[k] = sup;
  }
  return c;
}

double GreenStencil::dy_green_at(const Coords& c, const MultiIndex& alpha) const {
  const int ord = alpha.order();
  if (ord == 0) return center.field.at(c);
  if (ord == 1) {
    for (int d = 0; d < int(alpha.comps.size()); ++d)
      if (alpha.comps[d] == 1) {
        double h = center.field.grid().h();
        return (axis[d][1].field.at(c) - axis[d][0].field.at(c)) / (2.0 * h);
      }
  }
  throw Error(ErrorCode::spec_mismatch,
              "source stencil supports y-derivatives up to first order");
}

GreenStencil green_stencil(const DiscreteOperator& op, const Point& y, int max_j) {
  GreenStencil st;
  st.center = discrete_green(op, y);
  if (max_j >= 1) {
    const GridSpec& g = op.grid();
    const double h = g.h();
    st.axis.resize(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
      for (int s = 0; s < 2; ++s) {
        Point ys = st.center.y;
        ys[d] += (s == 0 ? -h : h);
        st.axis[d][s] = discrete_green(op, ys);
      }
    }
  }
  return st;
}

DiscreteField corrector_field(const DimensionParams& params, const MultiIndex& alpha,
                              const Domain& domain, const CutoffFunction& cutoff,
                              const GreenStencil& stencil) {
  if (alpha.order() > params.lambda)
    throw Error(ErrorCode::spec_mismatch, "multi-index order exceeds critical order");
  const GridSpec& g = stencil.center.field.grid();
  const Point& y = stencil.center.y;
  const double dy = domain.distance_to_boundary(y);
  if (dy < 16.0 * g.h())
    throw Error(ErrorCode::too_close_to_boundary,
                "corrector needs d(y) >= 16h to resolve the cutoff annulus");

  // singular model: same symbolic object as d^alpha_y Gamma, with the log
  // base rebased from diam to d(y)
  double sign = (alpha.order() % 2) ? -1.0 : 1.0;
  const sym::RadialExpr& model = gamma_derivative_expr(params, alpha);
  sym::EvalContext ctx;
  ctx.log_base = dy;
  ctx.profile = &cutoff.profile;
  ctx.cut_scale = dy;

  DiscreteField out(stencil.center.field.grid_ptr());
  const auto& coords = g.interior_coords();
  long diag = g.interior_index(stencil.center.y_coords);
  for (long k = 0; k < g.num_interior(); ++k) {
    if (k == diag) continue;
    Point z = g.node_point(coords[k]) - y;
    double masked = 0;
    double r = z.norm();
    if (r < 0.5 * dy) {
      masked = cutoff.profile.value(r / dy) * sign * model.eval(z, ctx);
    }
    out.values()[k] = stencil.dy_green_at(coords[k], alpha) - masked;
  }
  if (diag >= 0) {
    double acc = 0;
    int cnt = 0;
    for (int d = 0; d < g.dim(); ++d)
      for (int s = -1; s <= 1; s += 2) {
        Coords c = stencil.center.y_coords;
        c[d] += s;
        long j = g.interior_index(c);
        if (j >= 0) acc += out.values()[j], ++cnt;
      }
    out.values()[diag] = cnt ? acc / cnt : 0.0;
  }
  return out;
}

DiscreteField corrector_source(const DimensionParams& params, const MultiIndex& alpha,
                               const Point& y, std::shared_ptr<const GridSpec> grid,
                               const CutoffFunction& cutoff) {
  if (alpha.order() > params.lambda)
    throw Error(ErrorCode::spec_mismatch, "multi-index order exceeds critical order");
  const GridSpec& g = *grid;
  const double dy = g.domain().distance_to_boundary(y);
  if (dy < 16.0 * g.h())
    throw Error(ErrorCode::too_close_to_boundary,
                "corrector needs d(y) >= 16h to resolve the cutoff annulus");

  double sign = (alpha.order() % 2) ? -1.0 : 1.0;
  sym::RadialExpr masked =
      sym::RadialExpr::cutoff(params.n) * gamma_derivative_expr(params, alpha).scaled(sign);
  sym::RadialExpr f = masked.neg_laplacian_pow(params.m).scaled(-1.0);
  // Terms in which the cutoff was never differentiated sum to
  // eta * (-Lap)^m (singular model) = 0 away from the singularity; the
  // remainder is the commutator, supported exactly in the annulus. The
  // evaluation loop below keeps only terms with a differentiated cutoff.

  DiscreteField out(grid);
  const auto& coords = g.interior_coords();
  for (long k = 0; k < g.num_interior(); ++k) {
    Point z = g.node_point(coords[k]) - y;
    double r = z.norm();
    if (r < 0.25 * dy - 1e-14 || r > 0.5 * dy + 1e-14) continue;
    double acc = 0;
    for (const auto& t : f.terms()) {
      if (t.cut < 1) continue;  // commutator part only
      double v = t.p.eval(z);
      if (v == 0.0) continue;
      if (t.rpow != 0) v *= std::pow(r, t.rpow);
      if (t.logf) v *= std::log(dy / r);
      v *= cutoff.profile.deriv(t.cut, r / dy) * std::pow(dy, -t.sinv);
      acc += v;
    }
    out.values()[k] = acc;
  }
  return out;
}

namespace {

// 16-point Gauss-Legendre on [-1, 1]
const double kGx16[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
const double kGw16[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

// Exact integral of 1/|z| over the cube [-h/2, h/2]^3, reduced by symmetry to
// a closed form: 12 a^2 (2 asinh(1/sqrt(2)) - pi/6), a = h/2.
double cell_inverse_distance(int dim, double h) {
  if (dim != 3)
    throw Error(ErrorCode::spec_mismatch, "inverse-distance kernel cell applies in 3D");
  const double a = 0.5 * h;
  return 12.0 * a * a * (2.0 * std::asinh(1.0 / std::sqrt(2.0)) - kPi / 6.0);
}

// Integral of log(1 + d/|z|) over the square [-h/2, h/2]^2: polar reduction
// with closed-form radial integrals, Gauss in the angle (8-fold symmetry).
double cell_log_kernel(int dim, double h, double d) {
  if (dim != 2)
    throw Error(ErrorCode::spec_mismatch, "log kernel cell applies in 2D");
  const double a = 0.5 * h;
  double acc = 0;
  for (int k = 0; k < 16; ++k) {
    double th = 0.125 * kPi * (kGx16[k] + 1.0);
    double w = 0.125 * kPi * kGw16[k];
    double R = a / std::cos(th);
    // int_0^R r log(d + r) dr - int_0^R r log(r) dr
    double smooth = 0.5 * R * R * std::log(d + R) - 0.25 * R * R + 0.5 * d * R -
                    0.5 * d * d * std::log1p(R / d);
    double singular = 0.5 * R * R * (std::log(R) - 0.5);
    acc += w * (smooth - singular);
  }
  return 8.0 * acc;
}

}  // namespace

double dirichlet_rhs(const DimensionParams& params, const Point& x,
                     const std::vector<std::pair<MultiIndex, DiscreteField>>& data,
                     const Domain& domain) {
  double total = 0;
  for (const auto& [alpha, f] : data) {
    if (alpha.order() > params.lambda)
      throw Error(ErrorCode::spec_mismatch, "multi-index order exceeds critical order");
    const GridSpec& g = f.grid();
    const double h = g.h();
    const double cellvol = std::pow(h, g.dim());
    const double wexp = double(params.lambda - alpha.order());
    const auto& coords = g.interior_coords();
    double acc = 0;
    for (long k = 0; k < g.num_interior(); ++k) {
      double fv = std::abs(f.values()[k]);
      if (fv == 0.0) continue;
      Point ynode = g.node_point(coords[k]);
      double dyn = domain.distance_to_boundary(ynode);
      double weight = std::pow(dyn, wexp);
      double r = dist(x, ynode);
      double kernel_cell;
      if (r < 0.5 * h) {
        // x lives in this cell: exact kernel integral over the cell
        kernel_cell = params.odd ? cell_inverse_distance(g.dim(), h)
                                 : cell_log_kernel(g.dim(), h, dyn);
      } else {
        kernel_cell = (params.odd ? 1.0 / r : std::log1p(dyn / r)) * cellvol;
      }
      acc += weight * fv * kernel_cell;
    }
    total += acc;
  }
  return total;
}

EstimateReport ratio_statistics(const BoundSpec& spec,
                                const std::vector<std::vector<PairRecord>>& per_level,
                                const std::vector<double>& hs) {
  bool any = false;
  for (const auto& v : per_level) any = any || !v.empty();
  if (per_level.empty() || !any)
    throw Error(ErrorCode::empty_input, "no records to reduce");
  EstimateReport rep;
  rep.spec = spec;
  rep.level_records = per_level;
  for (size_t l = 0; l < per_level.size(); ++l) {
    LevelStats st;
    st.h = l < hs.size() ? hs[l] : 0.0;
    for (const auto& r : per_level[l]) {
      int rc = int(r.region);
      st.sup_ratio[rc] = std::max(st.sup_ratio[rc], r.ratio);
      st.count[rc]++;
      st.sup_overall = std::max(st.sup_overall, r.ratio);
      st.total++;
    }
    rep.levels.push_back(st);
  }
  rep.estimated_constant = rep.levels.back().sup_overall;
  rep.refinement_stable = true;
  for (size_t l = 1; l < rep.levels.size(); ++l) {
    double a = rep.levels[l - 1].sup_overall;
    double b = rep.levels[l].sup_overall;
    if (a <= 0 || b <= 0) continue;
    double q = b / a;
    if (q > 2.0 || q < 0.5) rep.refinement_stable = false;
  }
  return rep;
}

bool EstimateReport::all_finite() const {
  for (const auto& recs : level_records)
    for (const auto& r : recs)
      if (!std::isfinite(r.ratio)) return false;
  return true;
}

}  // namespace polygreen
