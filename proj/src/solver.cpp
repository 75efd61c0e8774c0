#include "polygreen/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

namespace polygreen {

// ---------------------------------------------------------------------------
// GridSpec

std::shared_ptr<const GridSpec> GridSpec::make(std::shared_ptr<const Domain> domain,
                                               double h) {
  if (h <= 0) throw Error(ErrorCode::config_invalid, "mesh width must be positive");
  auto g = std::make_shared<GridSpec>();
  g->domain_ = std::move(domain);
  g->n_ = g->domain_->dim();
  if (g->n_ != 2 && g->n_ != 3)
    throw Error(ErrorCode::config_invalid, "grids support dimension 2 or 3");
  g->h_ = h;
  Point lo, hi;
  g->domain_->bounding_box(lo, hi);
  g->origin_ = lo;
  long total = 1;
  for (int d = 0; d < g->n_; ++d) {
    g->counts_[d] = int(std::ceil((hi[d] - lo[d]) / h - 1e-9)) + 2;
    total *= g->counts_[d];
  }
  g->index_.assign(total, -1);
  Coords c{0, 0, 0};
  const int k2 = g->n_ == 3 ? g->counts_[2] : 1;
  for (c[0] = 0; c[0] < g->counts_[0]; ++c[0])
    for (c[1] = 0; c[1] < g->counts_[1]; ++c[1])
      for (c[2] = 0; c[2] < k2; ++c[2]) {
        Point x = g->node_point(c);
        if (g->domain_->membership(x)) {
          g->index_[g->flat_index(c)] = long(g->interior_coords_.size());
          g->interior_coords_.push_back(c);
        }
      }
  if (g->interior_coords_.empty())
    throw Error(ErrorCode::grid_too_coarse, "no interior nodes at this mesh width");
  return g;
}

DiscreteField DiscreteField::sample(std::shared_ptr<const GridSpec> grid,
                                    const std::function<double(const Point&)>& f) {
  DiscreteField out(grid);
  const auto& coords = grid->interior_coords();
  for (long i = 0; i < long(coords.size()); ++i)
    out.values()[i] = f(grid->node_point(coords[i]));
  return out;
}

double DiscreteField::interpolate(const Point& x) const {
  const GridSpec& g = *grid_;
  const int n = g.dim();
  Coords base{0, 0, 0};
  double frac[3] = {0, 0, 0};
  for (int d = 0; d < n; ++d) {
    double t = (x[d] - g.node_point({0, 0, 0})[d]) / g.h();
    double fl = std::floor(t);
    base[d] = int(fl);
    frac[d] = t - fl;
  }
  double v = 0;
  const int corners = 1 << n;
  for (int mask = 0; mask < corners; ++mask) {
    Coords c = base;
    double w = 1;
    for (int d = 0; d < n; ++d) {
      if (mask & (1 << d)) {
        c[d] += 1;
        w *= frac[d];
      } else {
        w *= 1.0 - frac[d];
      }
    }
    if (w != 0.0) v += w * at(c);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Stencils

std::vector<StencilEntry> polyharmonic_stencil(int n, int m) {
  std::map<Coords, double> st;
  st[{0, 0, 0}] = 1.0;
  for (int rep = 0; rep < m; ++rep) {
    std::map<Coords, double> next;
    for (const auto& [o, c] : st) {
      next[o] += 2.0 * n * c;
      for (int d = 0; d < n; ++d)
        for (int s = -1; s <= 1; s += 2) {
          Coords q = o;
          q[d] += s;
          next[q] -= c;
        }
    }
    st = std::move(next);
  }
  std::vector<StencilEntry> out;
  out.reserve(st.size());
  for (const auto& [o, c] : st)
    if (c != 0.0) out.push_back({o, c});
  return out;
}

namespace {

// 1D centered stencil for order q, coefficients excluding the 1/h^q factor.
std::vector<std::pair<int, double>> stencil_1d(int q) {
  std::vector<std::pair<int, double>> s{{0, 1.0}};
  auto convolve = [](const std::vector<std::pair<int, double>>& a,
                     const std::vector<std::pair<int, double>>& b) {
    std::map<int, double> m;
    for (auto& [oa, ca] : a)
      for (auto& [ob, cb] : b) m[oa + ob] += ca * cb;
    std::vector<std::pair<int, double>> out(m.begin(), m.end());
    return out;
  };
  const std::vector<std::pair<int, double>> d2{{-1, 1.0}, {0, -2.0}, {1, 1.0}};
  const std::vector<std::pair<int, double>> d1{{-1, -0.5}, {1, 0.5}};
  for (int k = 0; k < q / 2; ++k) s = convolve(s, d2);
  if (q % 2) s = convolve(s, d1);
  return s;
}

}  // namespace

std::vector<StencilEntry> derivative_stencil(int n, const MultiIndex& beta) {
  std::vector<StencilEntry> out{{{0, 0, 0}, 1.0}};
  for (int d = 0; d < n && d < int(beta.comps.size()); ++d) {
    if (beta.comps[d] == 0) continue;
    auto s1 = stencil_1d(beta.comps[d]);
    std::vector<StencilEntry> next;
    next.reserve(out.size() * s1.size());
    for (const auto& e : out)
      for (const auto& [o, c] : s1) {
        Coords q = e.offset;
        q[d] += o;
        next.push_back({q, e.coeff * c});
      }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

SpMatRow assemble_matrix(const GridSpec& g, int m) {
  const long N = g.num_interior();
  const double scale = std::pow(g.h(), -2.0 * m);
  auto st = polyharmonic_stencil(g.dim(), m);
  SpMatRow A(N, N);
  std::vector<Eigen::Index> counts(N, 0);
  const auto& coords = g.interior_coords();
  for (long r = 0; r < N; ++r) {
    int cnt = 0;
    for (const auto& e : st) {
      Coords c = coords[r];
      for (int d = 0; d < 3; ++d) c[d] += e.offset[d];
      if (g.interior_index(c) >= 0) ++cnt;
    }
    counts[r] = cnt;
  }
  A.reserve(counts);
  for (long r = 0; r < N; ++r) {
    for (const auto& e : st) {
      Coords c = coords[r];
      for (int d = 0; d < 3; ++d) c[d] += e.offset[d];
      long idx = g.interior_index(c);
      if (idx >= 0) A.insert(r, idx) = e.coeff * scale;
    }
  }
  A.makeCompressed();
  return A;
}

void gauss_seidel_sweep(const SpMatRow& L, const Vector& b, Vector& x, bool forward) {
  const long N = L.rows();
  const double* vals = L.valuePtr();
  const int* inner = L.innerIndexPtr();
  const int* outer = L.outerIndexPtr();
  auto row_update = [&](long r) {
    double sum = b[r];
    double diag = 0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) {
      int c = inner[k];
      if (c == r)
        diag = vals[k];
      else
        sum -= vals[k] * x[c];
    }
    x[r] = sum / diag;
  };
  if (forward)
    for (long r = 0; r < N; ++r) row_update(r);
  else
    for (long r = N - 1; r >= 0; --r) row_update(r);
}

}  // namespace

// ---------------------------------------------------------------------------
// Multigrid hierarchy (Laplacian V-cycle; higher orders solve through CG on
// the composed operator with an iterated-V-cycle preconditioner)

struct DiscreteOperator::MgHierarchy {
  struct Level {
    std::shared_ptr<const GridSpec> grid;
    SpMatRow L;
  };
  std::vector<Level> levels;
  Eigen::SimplicialLDLT<SpMatCol> coarse;
  int order = 1;       // m of the outer operator
  int inner_cycles = 2;  // V-cycles per approximate Laplacian inverse

  void restrict_to(int coarse_lev, const Vector& fine, Vector& out) const {
    const GridSpec& gf = *levels[coarse_lev - 1].grid;
    const GridSpec& gc = *levels[coarse_lev].grid;
    const int n = gc.dim();
    out.setZero(gc.num_interior());
    const auto& cc = gc.interior_coords();
    const int span = n == 3 ? 27 : 9;
    for (long i = 0; i < long(cc.size()); ++i) {
      double acc = 0;
      for (int k = 0; k < span; ++k) {
        int rem = k;
        Coords o{0, 0, 0};
        double w = 1;
        for (int d = 0; d < n; ++d) {
          int od = rem % 3 - 1;
          rem /= 3;
          o[d] = od;
          w *= (od == 0) ? 0.5 : 0.25;
        }
        Coords f{2 * cc[i][0] + o[0], 2 * cc[i][1] + o[1],
                 n == 3 ? 2 * cc[i][2] + o[2] : 0};
        long fi = gf.interior_index(f);
        if (fi >= 0) acc += w * fine[fi];
      }
      out[i] = acc;
    }
  }

  void prolong_add(int coarse_lev, const Vector& coarse_x, Vector& fine) const {
    const GridSpec& gf = *levels[coarse_lev - 1].grid;
    const GridSpec& gc = *levels[coarse_lev].grid;
    const int n = gc.dim();
    const auto& fc = gf.interior_coords();
    for (long i = 0; i < long(fc.size()); ++i) {
      Coords base{fc[i][0] >> 1, fc[i][1] >> 1, n == 3 ? fc[i][2] >> 1 : 0};
      int rem[3] = {fc[i][0] & 1, fc[i][1] & 1, n == 3 ? fc[i][2] & 1 : 0};
      double acc = 0;
      const int corners = 1 << n;
      for (int mask = 0; mask < corners; ++mask) {
        Coords c = base;
        double w = 1;
        bool skip = false;
        for (int d = 0; d < n; ++d) {
          if (mask & (1 << d)) {
            if (!rem[d]) {
              skip = true;
              break;
            }
            c[d] += 1;
            w *= 0.5;
          } else if (rem[d]) {
            w *= 0.5;
          }
        }
        if (skip) continue;
        long ci = gc.interior_index(c);
        if (ci >= 0) acc += w * coarse_x[ci];
      }
      fine[i] += acc;
    }
  }

  void vcycle(int lev, const Vector& b, Vector& x) const {
    if (lev == int(levels.size()) - 1) {
      x = coarse.solve(b);
      return;
    }
    const SpMatRow& L = levels[lev].L;
    gauss_seidel_sweep(L, b, x, true);
    Vector r = b - L * x;
    Vector rc, xc;
    restrict_to(lev + 1, r, rc);
    xc.setZero(rc.size());
    vcycle(lev + 1, rc, xc);
    prolong_add(lev + 1, xc, x);
    gauss_seidel_sweep(L, b, x, false);
  }

  /// Fixed linear SPD approximation of L^{-1}: inner_cycles V-cycles.
  Vector approx_laplace_inv(const Vector& r) const {
    Vector x = Vector::Zero(r.size());
    vcycle(0, r, x);
    for (int it = 1; it < inner_cycles; ++it) {
      Vector res = r - levels[0].L * x;
      Vector dx = Vector::Zero(r.size());
      vcycle(0, res, dx);
      x += dx;
    }
    return x;
  }

  Vector precondition(const Vector& r) const {
    Vector z = approx_laplace_inv(r);
    for (int k = 1; k < order; ++k) z = approx_laplace_inv(z);
    return z;
  }
};

// ---------------------------------------------------------------------------
// Operator assembly and solves

DiscreteOperator assemble_operator(std::shared_ptr<const GridSpec> grid, int m,
                                   DiscreteOperator::Backend backend) {
  if (m < 1) throw Error(ErrorCode::config_invalid, "operator order must be >= 1");
  const GridSpec& g = *grid;
  if (g.domain().narrowest_feature() / g.h() < 8.0)
    throw Error(ErrorCode::grid_too_coarse,
                "narrowest feature must span at least 8 mesh widths");
  DiscreteOperator op;
  op.grid_ = grid;
  op.m_ = m;
  op.A_ = assemble_matrix(g, m);

  bool direct;
  switch (backend) {
    case DiscreteOperator::Backend::direct: direct = true; break;
    case DiscreteOperator::Backend::multigrid: direct = false; break;
    default:
      direct = (g.dim() == 2) || (g.num_interior() <= 22000);
  }

  if (direct) {
    SpMatCol Acol = op.A_;
    op.ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMatCol>>();
    op.ldlt_->compute(Acol);
    if (op.ldlt_->info() != Eigen::Success)
      throw Error(ErrorCode::factorization_failed,
                  "sparse Cholesky factorization failed (operator not SPD?)");
    return op;
  }

  auto mg = std::make_shared<DiscreteOperator::MgHierarchy>();
  mg->order = m;
  std::shared_ptr<const GridSpec> lev_grid = grid;
  for (;;) {
    DiscreteOperator::MgHierarchy::Level lev;
    lev.grid = lev_grid;
    lev.L = (m == 1 && lev_grid == grid) ? op.A_ : assemble_matrix(*lev_grid, 1);
    mg->levels.push_back(std::move(lev));
    if (lev_grid->num_interior() <= 500) break;
    std::shared_ptr<const GridSpec> coarser;
    try {
      coarser = GridSpec::make(lev_grid->domain_ptr(), 2.0 * lev_grid->h());
    } catch (const Error&) {
      break;
    }
    if (coarser->num_interior() < 1) break;
    lev_grid = coarser;
  }
  SpMatCol Lc = mg->levels.back().L;
  mg->coarse.compute(Lc);
  if (mg->coarse.info() != Eigen::Success)
    throw Error(ErrorCode::factorization_failed, "coarse-level factorization failed");
  op.mg_ = mg;
  return op;
}

DiscreteField DiscreteOperator::apply(const DiscreteField& u) const {
  return DiscreteField(grid_, A_ * u.values());
}

Vector DiscreteOperator::solve_vector(const Vector& b) const {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  const double tol = 1e-12 * bnorm;

  if (ldlt_) {
    Vector x = ldlt_->solve(b);
    for (int it = 0; it < 4; ++it) {  // iterative refinement
      Vector r = b - A_ * x;
      if (r.norm() <= tol) break;
      x += ldlt_->solve(r);
    }
    Vector r = b - A_ * x;
    if (r.norm() > 1e-10 * bnorm)
      throw Error(ErrorCode::solver_diverged, "direct solve residual above tolerance");
    return x;
  }

  // preconditioned conjugate gradients on the composed operator
  const auto& mg = *mg_;
  Vector x = Vector::Zero(b.size());
  Vector r = b;
  Vector z = mg.precondition(r);
  Vector p = z;
  double rz = r.dot(z);
  const int maxit = 600;
  for (int it = 0; it < maxit; ++it) {
    Vector Ap = A_ * p;
    double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= tol) break;
    Vector z2 = mg.precondition(r);
    double rz2 = r.dot(z2);
    p = z2 + (rz2 / rz) * p;
    z = std::move(z2);
    rz = rz2;
  }
  Vector res = b - A_ * x;
  if (res.norm() > 1e-10 * bnorm)
    throw Error(ErrorCode::solver_diverged,
                "multigrid-preconditioned CG residual above tolerance");
  return x;
}

DiscreteField solve_dirichlet(const DiscreteOperator& op, const DiscreteField& rhs) {
  return DiscreteField(op.grid_ptr(), op.solve_vector(rhs.values()));
}

GreenColumn discrete_green(const DiscreteOperator& op, const Point& y) {
  const GridSpec& g = op.grid();
  Coords c = g.snap(y);
  long idx = g.interior_index(c);
  if (idx < 0)
    throw Error(ErrorCode::point_too_close_to_boundary,
                "source snaps outside the interior node set");
  Point ys = g.node_point(c);
  double d = g.domain().distance_to_boundary(ys);
  if (d < 4.0 * g.h())
    throw Error(ErrorCode::point_too_close_to_boundary,
                "source closer than 4h to the boundary");
  Vector b = Vector::Zero(g.num_interior());
  b[idx] = std::pow(g.h(), -double(g.dim()));
  GreenColumn col;
  col.field = DiscreteField(op.grid_ptr(), op.solve_vector(b));
  col.y = ys;
  col.y_coords = c;
  col.snap_distance = dist(y, ys);
  return col;
}

DiscreteField regular_part(const GreenColumn& green, const DimensionParams& params,
                           double diam) {
  const GridSpec& g = green.field.grid();
  DiscreteField s(green.field.grid_ptr());
  const auto& coords = g.interior_coords();
  long diag = g.interior_index(green.y_coords);
  for (long i = 0; i < g.num_interior(); ++i) {
    if (i == diag) continue;
    Point z = g.node_point(coords[i]) - green.y;
    s.values()[i] = green.field.values()[i] - gamma_eval(params, z, diam);
  }
  if (diag >= 0) {
    // Gamma is singular on the diagonal; fill with the face-neighbor average.
    double acc = 0;
    int cnt = 0;
    for (int d = 0; d < g.dim(); ++d)
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        Coords c = green.y_coords;
        c[d] += sgn;
        long j = g.interior_index(c);
        if (j >= 0 && j != diag) {
          Point z = g.node_point(c) - green.y;
          acc += green.field.values()[j] - gamma_eval(params, z, diam);
          ++cnt;
        }
      }
    s.values()[diag] = cnt ? acc / cnt : 0.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Derivatives and norms

double derivative_at(const DiscreteField& field, const Coords& c, const MultiIndex& beta) {
  const GridSpec& g = field.grid();
  auto st = derivative_stencil(g.dim(), beta);
  double acc = 0;
  for (const auto& e : st) {
    Coords q{c[0] + e.offset[0], c[1] + e.offset[1], c[2] + e.offset[2]};
    acc += e.coeff * field.at(q);
  }
  return acc * std::pow(g.h(), -double(beta.order()));
}

namespace {

void enumerate_multi(int n, int total, int axis, MultiIndex& cur,
                     std::vector<std::pair<MultiIndex, double>>& out) {
  if (axis == n - 1) {
    cur.comps[axis] = total;
    double mult = 1.0;  // |beta|! / beta!
    int placed = 0;
    for (int c : cur.comps) {
      for (int k = 1; k <= c; ++k) mult *= double(++placed) / double(k);
    }
    out.push_back({cur, mult});
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.comps[axis] = k;
    enumerate_multi(n, total - k, axis + 1, cur, out);
  }
}

const std::vector<std::pair<MultiIndex, double>>& multi_indices(int n, int order) {
  static std::map<std::pair<int, int>, std::vector<std::pair<MultiIndex, double>>> cache;
  auto it = cache.find({n, order});
  if (it == cache.end()) {
    std::vector<std::pair<MultiIndex, double>> v;
    MultiIndex cur = MultiIndex::zero(n);
    enumerate_multi(n, order, 0, cur, v);
    it = cache.emplace(std::make_pair(n, order), std::move(v)).first;
  }
  return it->second;
}

}  // namespace

double gradient_norm_at(const DiscreteField& field, const Coords& c, int i,
                        const MultiIndex& extra) {
  const GridSpec& g = field.grid();
  if (i == 0) {
    double v = extra.order() == 0 ? field.at(c) : derivative_at(field, c, extra);
    return std::abs(v);
  }
  double acc = 0;
  for (const auto& [beta, mult] : multi_indices(g.dim(), i)) {
    MultiIndex full = beta;
    for (int d = 0; d < int(extra.comps.size()) && d < g.dim(); ++d)
      full.comps[d] += extra.comps[d];
    double v = derivative_at(field, c, full);
    acc += mult * v * v;
  }
  return std::sqrt(acc);
}

DiscreteField mixed_derivative(const DiscreteField& field, int i, const MultiIndex& multi) {
  const GridSpec& g = field.grid();
  DiscreteField out(field.grid_ptr());
  const auto& coords = g.interior_coords();
  for (long k = 0; k < g.num_interior(); ++k)
    out.values()[k] = gradient_norm_at(field, coords[k], i, multi);
  return out;
}

double energy_norm(const DiscreteField& field, int m) {
  const GridSpec& g = field.grid();
  const auto& betas = multi_indices(g.dim(), m);
  // precompute scaled stencils once
  struct S {
    std::vector<StencilEntry> st;
    double mult;
    double hscale;
  };
  std::vector<S> stencils;
  for (const auto& [beta, mult] : betas)
    stencils.push_back({derivative_stencil(g.dim(), beta), mult,
                        std::pow(g.h(), -double(m))});
  double acc = 0;
  const auto& coords = g.interior_coords();
  for (long k = 0; k < g.num_interior(); ++k) {
    for (const auto& s : stencils) {
      double v = 0;
      for (const auto& e : s.st) {
        Coords q{coords[k][0] + e.offset[0], coords[k][1] + e.offset[1],
                 coords[k][2] + e.offset[2]};
        v += e.coeff * field.at(q);
      }
      v *= s.hscale;
      acc += s.mult * v * v;
    }
  }
  return std::sqrt(acc * std::pow(g.h(), g.dim()));
}

double hardy_ratio(const DiscreteField& field, int m, const Point& q) {
  const GridSpec& g = field.grid();
  if (field.values().norm() == 0.0)
    throw Error(ErrorCode::zero_field, "Hardy ratio undefined for the zero field");
  double num = 0;
  const auto& coords = g.interior_coords();
  for (long k = 0; k < g.num_interior(); ++k) {
    double v = field.values()[k];
    if (v == 0.0) continue;
    double r = dist(g.node_point(coords[k]), q);
    num += v * v * std::pow(r, -2.0 * m);
  }
  num = std::sqrt(num * std::pow(g.h(), g.dim()));
  return num / energy_norm(field, m);
}

// ---------------------------------------------------------------------------
// Dumps

void dump_field(const DiscreteField& field, const std::string& path) {
  const GridSpec& g = field.grid();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  Point lo, hi;
  g.domain().bounding_box(lo, hi);
  char header[256];
  int len;
  if (g.dim() == 2)
    len = std::snprintf(header, sizeof header, "%d %d %d %.17g %.17g %.17g %.17g %.17g\n",
                        g.dim(), g.lattice_count(0), g.lattice_count(1), g.h(), lo[0],
                        lo[1], hi[0], hi[1]);
  else
    len = std::snprintf(header, sizeof header,
                        "%d %d %d %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                        g.dim(), g.lattice_count(0), g.lattice_count(1),
                        g.lattice_count(2), g.h(), lo[0], lo[1], lo[2], hi[0], hi[1],
                        hi[2]);
  out.write(header, len);
  Coords c{0, 0, 0};
  const int k2 = g.dim() == 3 ? g.lattice_count(2) : 1;
  for (c[0] = 0; c[0] < g.lattice_count(0); ++c[0])
    for (c[1] = 0; c[1] < g.lattice_count(1); ++c[1])
      for (c[2] = 0; c[2] < k2; ++c[2]) {
        double v = field.at(c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
  if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + path + "'");
}

void csv_slice(const DiscreteField& field, const std::string& path, int z_index) {
  const GridSpec& g = field.grid();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  out << "x,y,value\n";
  char buf[128];
  Coords c{0, 0, 0};
  if (g.dim() == 3) c[2] = z_index >= 0 ? z_index : g.lattice_count(2) / 2;
  for (c[0] = 0; c[0] < g.lattice_count(0); ++c[0])
    for (c[1] = 0; c[1] < g.lattice_count(1); ++c[1]) {
      Point x = g.node_point(c);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], field.at(c));
      out << buf;
    }
  if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + path + "'");
}

}  // namespace polygreen
