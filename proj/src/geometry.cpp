#include "polygreen/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace polygreen {

std::string domain_kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::unit_ball: return "unit-ball";
    case DomainKind::punctured_ball: return "punctured-ball";
    case DomainKind::annulus: return "annulus";
    case DomainKind::ellipse: return "ellipse";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::l_shape: return "l-shape";
  }
  return "?";
}

DomainKind domain_kind_from_name(const std::string& name) {
  if (name == "unit-ball") return DomainKind::unit_ball;
  if (name == "punctured-ball") return DomainKind::punctured_ball;
  if (name == "annulus") return DomainKind::annulus;
  if (name == "ellipse") return DomainKind::ellipse;
  if (name == "rectangle") return DomainKind::rectangle;
  if (name == "l-shape") return DomainKind::l_shape;
  throw Error(ErrorCode::config_invalid, "unknown domain kind '" + name + "'");
}

Domain Domain::unit_ball(int n) {
  if (n < 2) throw Error(ErrorCode::config_invalid, "ball dimension must be >= 2");
  return Domain(DomainKind::unit_ball, n, {});
}

Domain Domain::punctured_ball(int n, double epsilon) {
  if (n < 2 || epsilon < 0 || epsilon >= 1)
    throw Error(ErrorCode::config_invalid, "punctured ball needs n >= 2, 0 <= eps < 1");
  return Domain(DomainKind::punctured_ball, n, {epsilon});
}

Domain Domain::annulus(int n, double r_in, double r_out) {
  if (n < 2 || r_in <= 0 || r_out <= r_in)
    throw Error(ErrorCode::config_invalid, "annulus needs 0 < r_in < r_out");
  return Domain(DomainKind::annulus, n, {r_in, r_out});
}

Domain Domain::ellipse(double a, double b) {
  if (a <= 0 || b <= 0) throw Error(ErrorCode::config_invalid, "ellipse needs a, b > 0");
  return Domain(DomainKind::ellipse, 2, {a, b});
}

Domain Domain::rectangle(std::vector<double> sides) {
  if (sides.size() != 2 && sides.size() != 3)
    throw Error(ErrorCode::config_invalid, "rectangle needs 2 or 3 side lengths");
  for (double s : sides)
    if (s <= 0) throw Error(ErrorCode::config_invalid, "rectangle sides must be positive");
  int n = int(sides.size());
  return Domain(DomainKind::rectangle, n, std::move(sides));
}

Domain Domain::l_shape(double a, double b) {
  if (a <= 0 || b <= 0) throw Error(ErrorCode::config_invalid, "l-shape needs a, b > 0");
  return Domain(DomainKind::l_shape, 2, {a, b});
}

namespace {

// Nearest point on the axis-aligned ellipse (a, b) from an interior point p,
// reduced to the first quadrant. Robust bisection + Newton on the standard
// parameter t of the normal equations.
Point ellipse_nearest(double a, double b, const Point& p) {
  double px = std::abs(p[0]), py = std::abs(p[1]);
  Point q(2);
  if (py < 1e-300) {
    // on the major axis (assume a >= b handled generically below)
    double c2 = a * a - b * b;
    if (c2 > 0 && px < c2 / a) {
      double qx = a * a * px / c2;
      double qy = b * std::sqrt(std::max(0.0, 1.0 - qx * qx / (a * a)));
      q[0] = qx;
      q[1] = qy;
    } else if (a >= b) {
      q[0] = a;
      q[1] = 0.0;
    } else {
      // prolate case: nearest vertex along x is still (a, 0) for px > 0,
      // for px == 0 the nearest point is (a, 0) iff a < b
      q[0] = (px > 0 || a < b) ? a : 0.0;
      q[1] = (q[0] == 0.0) ? b : 0.0;
    }
  } else if (px < 1e-300) {
    double c2 = b * b - a * a;
    if (c2 > 0 && py < c2 / b) {
      double qy = b * b * py / c2;
      double qx = a * std::sqrt(std::max(0.0, 1.0 - qy * qy / (b * b)));
      q[0] = qx;
      q[1] = qy;
    } else {
      q[0] = 0.0;
      q[1] = b;
    }
  } else {
    // F(t) = (a px/(t+a^2))^2 + (b py/(t+b^2))^2 - 1, root in (-min(a,b)^2, 0]
    double tlo = -std::min(a * a, b * b);
    auto F = [&](double t) {
      double u = a * px / (t + a * a);
      double v = b * py / (t + b * b);
      return u * u + v * v - 1.0;
    };
    double hi = 0.0, lo = tlo * (1.0 - 1e-15);
    // expand lo toward the pole until F > 0
    while (F(lo) < 0) lo = tlo + (lo - tlo) * 0.25;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double u = a * px / (t + a * a);
      double v = b * py / (t + b * b);
      double f = u * u + v * v - 1.0;
      if (f > 0)
        lo = t;
      else
        hi = t;
      double df = -2.0 * (u * u / (t + a * a) + v * v / (t + b * b));
      double tn = t - f / df;
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      if (std::abs(tn - t) <= 1e-17 * (std::abs(t) + 1e-30)) {
        t = tn;
        break;
      }
      t = tn;
    }
    q[0] = a * a * px / (t + a * a);
    q[1] = b * b * py / (t + b * b);
  }
  if (p[0] < 0) q[0] = -q[0];
  if (p[1] < 0) q[1] = -q[1];
  return q;
}

struct Segment {
  double ax, ay, bx, by;
};

std::vector<Segment> l_shape_edges(double a, double b) {
  // arms along x (length a) and y (length b), thickness a/2 and b/2
  return {
      {0, 0, a, 0},         {a, 0, a, b / 2},     {a, b / 2, a / 2, b / 2},
      {a / 2, b / 2, a / 2, b}, {a / 2, b, 0, b}, {0, b, 0, 0},
  };
}

Point segment_nearest(const Segment& s, const Point& p) {
  double vx = s.bx - s.ax, vy = s.by - s.ay;
  double t = ((p[0] - s.ax) * vx + (p[1] - s.ay) * vy) / (vx * vx + vy * vy);
  t = std::clamp(t, 0.0, 1.0);
  Point q(2);
  q[0] = s.ax + t * vx;
  q[1] = s.ay + t * vy;
  return q;
}

}  // namespace

bool Domain::membership(const Point& x) const {
  if (x.dim() != n_) return false;
  switch (kind_) {
    case DomainKind::unit_ball:
      return x.norm2() < 1.0;
    case DomainKind::punctured_ball: {
      double r = x.norm();
      return r > params_[0] && r < 1.0;
    }
    case DomainKind::annulus: {
      double r = x.norm();
      return r > params_[0] && r < params_[1];
    }
    case DomainKind::ellipse: {
      double a = params_[0], b = params_[1];
      return x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) < 1.0;
    }
    case DomainKind::rectangle: {
      for (int i = 0; i < n_; ++i)
        if (x[i] <= 0.0 || x[i] >= params_[i]) return false;
      return true;
    }
    case DomainKind::l_shape: {
      double a = params_[0], b = params_[1];
      if (x[0] <= 0 || x[0] >= a || x[1] <= 0 || x[1] >= b) return false;
      return !(x[0] >= a / 2 && x[1] >= b / 2);
    }
  }
  return false;
}

double Domain::distance_to_boundary(const Point& x) const {
  if (!membership(x))
    throw Error(ErrorCode::point_outside_domain, "point is not in the domain interior");
  switch (kind_) {
    case DomainKind::unit_ball:
      return 1.0 - x.norm();
    case DomainKind::punctured_ball:
      return std::min(1.0 - x.norm(), x.norm() - params_[0]);
    case DomainKind::annulus:
      return std::min(params_[1] - x.norm(), x.norm() - params_[0]);
    case DomainKind::ellipse:
      return dist(x, ellipse_nearest(params_[0], params_[1], x));
    case DomainKind::rectangle: {
      double d = params_[0];
      for (int i = 0; i < n_; ++i) d = std::min({d, x[i], params_[i] - x[i]});
      return d;
    }
    case DomainKind::l_shape: {
      double best = 1e300;
      for (const auto& e : l_shape_edges(params_[0], params_[1]))
        best = std::min(best, dist(x, segment_nearest(e, x)));
      return best;
    }
  }
  return 0;
}

Point Domain::nearest_boundary_point(const Point& x) const {
  if (!membership(x))
    throw Error(ErrorCode::point_outside_domain, "point is not in the domain interior");
  switch (kind_) {
    case DomainKind::unit_ball: {
      double r = x.norm();
      if (r == 0.0) {  // any direction works at the center
        Point q(n_);
        q[0] = 1.0;
        return q;
      }
      return x * (1.0 / r);
    }
    case DomainKind::punctured_ball: {
      double r = x.norm();
      if (1.0 - r <= r - params_[0]) return x * (1.0 / r);
      return x * (params_[0] / r);  // eps = 0 gives the puncture point itself
    }
    case DomainKind::annulus: {
      double r = x.norm();
      double target = (params_[1] - r <= r - params_[0]) ? params_[1] : params_[0];
      return x * (target / r);
    }
    case DomainKind::ellipse:
      return ellipse_nearest(params_[0], params_[1], x);
    case DomainKind::rectangle: {
      int axis = 0;
      double best = 1e300;
      double coord = 0;
      for (int i = 0; i < n_; ++i) {
        if (x[i] < best) best = x[i], axis = i, coord = 0.0;
        if (params_[i] - x[i] < best) best = params_[i] - x[i], axis = i, coord = params_[i];
      }
      Point q = x;
      q[axis] = coord;
      return q;
    }
    case DomainKind::l_shape: {
      double best = 1e300;
      Point bq(2);
      for (const auto& e : l_shape_edges(params_[0], params_[1])) {
        Point q = segment_nearest(e, x);
        double d = dist(x, q);
        if (d < best) best = d, bq = q;
      }
      return bq;
    }
  }
  return x;
}

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::unit_ball:
    case DomainKind::punctured_ball:
      return 2.0;
    case DomainKind::annulus:
      return 2.0 * params_[1];
    case DomainKind::ellipse:
      return 2.0 * std::max(params_[0], params_[1]);
    case DomainKind::rectangle: {
      double s = 0;
      for (int i = 0; i < n_; ++i) s += params_[i] * params_[i];
      return std::sqrt(s);
    }
    case DomainKind::l_shape:
      return std::sqrt(params_[0] * params_[0] + params_[1] * params_[1]);
  }
  return 0;
}

double Domain::narrowest_feature() const {
  switch (kind_) {
    case DomainKind::unit_ball:
      return 2.0;
    case DomainKind::punctured_ball:
      return 1.0 - params_[0];
    case DomainKind::annulus:
      return params_[1] - params_[0];
    case DomainKind::ellipse:
      return 2.0 * std::min(params_[0], params_[1]);
    case DomainKind::rectangle: {
      double s = params_[0];
      for (int i = 1; i < n_; ++i) s = std::min(s, params_[i]);
      return s;
    }
    case DomainKind::l_shape:
      return 0.5 * std::min(params_[0], params_[1]);
  }
  return 0;
}

void Domain::bounding_box(Point& lo, Point& hi) const {
  lo = Point(n_);
  hi = Point(n_);
  switch (kind_) {
    case DomainKind::unit_ball:
    case DomainKind::punctured_ball:
      for (int i = 0; i < n_; ++i) lo[i] = -1.0, hi[i] = 1.0;
      break;
    case DomainKind::annulus:
      for (int i = 0; i < n_; ++i) lo[i] = -params_[1], hi[i] = params_[1];
      break;
    case DomainKind::ellipse:
      lo[0] = -params_[0], hi[0] = params_[0];
      lo[1] = -params_[1], hi[1] = params_[1];
      break;
    case DomainKind::rectangle:
    case DomainKind::l_shape:
      for (int i = 0; i < n_; ++i) lo[i] = 0.0, hi[i] = params_[i];
      break;
  }
}

Point Domain::sample_interior(CounterRng& rng) const {
  Point lo, hi;
  bounding_box(lo, hi);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Point x(n_);
    for (int i = 0; i < n_; ++i) x[i] = rng.uniform(lo[i], hi[i]);
    if (membership(x) && distance_to_boundary(x) > 0.0) return x;
  }
  throw Error(ErrorCode::geometry_infeasible, "interior rejection sampling failed");
}

SamplePair SamplePair::make(const Domain& dom, const Point& x, const Point& y) {
  SamplePair p;
  p.x = x;
  p.y = y;
  p.d_x = dom.distance_to_boundary(x);
  p.d_y = dom.distance_to_boundary(y);
  p.sep = dist(x, y);
  return p;
}

std::string region_case_name(RegionCase c) {
  switch (c) {
    case RegionCase::case_i: return "I";
    case RegionCase::case_ii: return "II";
    case RegionCase::case_iii: return "III";
  }
  return "?";
}

RegionClassifier RegionClassifier::make(double N) {
  if (N < 25.0)
    throw Error(ErrorCode::config_invalid, "region threshold N must be >= 25");
  RegionClassifier c;
  c.N = N;
  return c;
}

RegionCase classify_region(const SamplePair& pair, const RegionClassifier& cls) {
  double dmin = std::min(pair.d_x, pair.d_y);
  double dmax = std::max(pair.d_x, pair.d_y);
  if (pair.sep >= cls.N * dmin) return RegionCase::case_i;
  if (pair.sep <= dmax / cls.N) return RegionCase::case_ii;
  return RegionCase::case_iii;
}

namespace {

Point random_direction(CounterRng& rng, int n) {
  // Box-Muller based unit vector
  for (;;) {
    Point v(n);
    double s = 0;
    for (int i = 0; i < n; ++i) {
      double u1 = std::max(rng.next_double(), 1e-300);
      double u2 = rng.next_double();
      v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
      s += v[i] * v[i];
    }
    if (s > 1e-12) return v * (1.0 / std::sqrt(s));
  }
}

}  // namespace

PairSample sample_interior_pairs(const Domain& domain, const SamplePlan& plan) {
  if (plan.count < 1) throw Error(ErrorCode::config_invalid, "pair count must be >= 1");
  if (plan.min_sep < 0) throw Error(ErrorCode::config_invalid, "min_sep must be >= 0");
  PairSample out;
  CounterRng rng(plan.seed, 0x706772 /* stream tag */);
  const double N = plan.classifier.N;
  const int quota = std::max(1, plan.count / 10);
  int have[3] = {0, 0, 0};

  auto ok_pair = [&](const SamplePair& p) {
    return p.sep >= plan.min_sep && p.d_x >= plan.min_bdist && p.d_y >= plan.min_bdist;
  };
  auto push = [&](const SamplePair& p) {
    have[int(classify_region(p, plan.classifier))]++;
    out.pairs.push_back(p);
  };

  // phase 1: targeted strategies per region
  auto try_case_iii = [&]() -> bool {
    Point x = domain.sample_interior(rng);
    double dx = domain.distance_to_boundary(x);
    if (dx < plan.min_bdist) return false;
    double t = dx * rng.uniform(0.6, 1.6);
    if (t < plan.min_sep) t = plan.min_sep * rng.uniform(1.0, 1.3);
    Point y = x + random_direction(rng, domain.dim()) * t;
    if (!domain.membership(y)) return false;
    SamplePair p = SamplePair::make(domain, x, y);
    if (!ok_pair(p) || classify_region(p, plan.classifier) != RegionCase::case_iii)
      return false;
    push(p);
    return true;
  };
  auto try_case_ii = [&]() -> bool {
    Point x = domain.sample_interior(rng);
    double dx = domain.distance_to_boundary(x);
    if (dx < plan.min_bdist || dx <= 1.05 * N * plan.min_sep) return false;
    double tmax = dx / (1.05 * N);
    double tmin = std::max(plan.min_sep, tmax * 1e-3);
    if (tmin >= tmax) return false;
    double t = rng.uniform(tmin, tmax);
    Point y = x + random_direction(rng, domain.dim()) * t;
    if (!domain.membership(y)) return false;
    SamplePair p = SamplePair::make(domain, x, y);
    if (!ok_pair(p) || classify_region(p, plan.classifier) != RegionCase::case_ii)
      return false;
    push(p);
    return true;
  };
  auto try_case_i = [&]() -> bool {
    // place x close to the boundary, y far from x
    Point seed_pt = domain.sample_interior(rng);
    double ds = domain.distance_to_boundary(seed_pt);
    double cap = std::min(ds, domain.diameter() / (2.2 * N));
    if (cap <= plan.min_bdist) return false;
    double delta = rng.uniform(std::max(plan.min_bdist, cap * 1e-3), cap);
    Point q = domain.nearest_boundary_point(seed_pt);
    Point inward = (seed_pt - q) * (1.0 / ds);
    Point x = q + inward * delta;
    if (!domain.membership(x)) return false;
    SamplePair probe;
    for (int k = 0; k < 8; ++k) {
      Point y = domain.sample_interior(rng);
      probe = SamplePair::make(domain, x, y);
      if (ok_pair(probe) &&
          classify_region(probe, plan.classifier) == RegionCase::case_i) {
        push(probe);
        return true;
      }
    }
    return false;
  };
  auto try_generic = [&]() -> bool {
    Point x = domain.sample_interior(rng);
    Point y = domain.sample_interior(rng);
    SamplePair p = SamplePair::make(domain, x, y);
    if (!ok_pair(p)) return false;
    push(p);
    return true;
  };

  const long budget_per_region = 300L * plan.count;
  // region-targeted fill
  for (int region = 0; region < 3; ++region) {
    long attempts = 0;
    while (have[region] < quota && int(out.pairs.size()) < plan.count &&
           attempts < budget_per_region) {
      ++attempts;
      switch (RegionCase(region)) {
        case RegionCase::case_i: try_case_i(); break;
        case RegionCase::case_ii: try_case_ii(); break;
        case RegionCase::case_iii: try_case_iii(); break;
      }
    }
    if (have[region] < quota)
      out.warnings.push_back("region-unreachable: Case" +
                             region_case_name(RegionCase(region)) + " received " +
                             std::to_string(have[region]) + "/" + std::to_string(quota) +
                             " pairs");
  }
  // phase 2: generic fill to count
  long attempts = 0;
  while (int(out.pairs.size()) < plan.count && attempts < 10L * budget_per_region) {
    ++attempts;
    try_generic();
  }
  if (int(out.pairs.size()) < plan.count)
    throw Error(ErrorCode::geometry_infeasible,
                "could not draw the requested number of pairs under the given "
                "separation constraints");
  return out;
}

}  // namespace polygreen
