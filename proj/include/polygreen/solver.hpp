#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "polygreen/fundamental.hpp"
#include "polygreen/geometry.hpp"

namespace polygreen {

using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SpMatCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Vector = Eigen::VectorXd;

using Coords = std::array<int, 3>;  // third entry unused in 2D

/// Uniform lattice over the domain bounding box; interior nodes are the
/// lattice points inside the domain. Fields extend by zero outside, which is
/// what enforces the discrete clamped conditions.
class GridSpec {
 public:
  static std::shared_ptr<const GridSpec> make(std::shared_ptr<const Domain> domain,
                                              double h);

  const Domain& domain() const { return *domain_; }
  std::shared_ptr<const Domain> domain_ptr() const { return domain_; }
  int dim() const { return n_; }
  double h() const { return h_; }
  long num_interior() const { return long(interior_coords_.size()); }
  const std::vector<Coords>& interior_coords() const { return interior_coords_; }

  int lattice_count(int axis) const { return counts_[axis]; }
  bool in_lattice(const Coords& c) const {
    for (int d = 0; d < n_; ++d)
      if (c[d] < 0 || c[d] >= counts_[d]) return false;
    return true;
  }
  long flat_index(const Coords& c) const {
    long f = c[0];
    for (int d = 1; d < n_; ++d) f = f * counts_[d] + c[d];
    return f;
  }
  /// Interior index or -1.
  long interior_index(const Coords& c) const {
    if (!in_lattice(c)) return -1;
    return index_[flat_index(c)];
  }
  Point node_point(const Coords& c) const {
    Point x(n_);
    for (int d = 0; d < n_; ++d) x[d] = origin_[d] + c[d] * h_;
    return x;
  }
  Coords snap(const Point& x) const {
    Coords c{0, 0, 0};
    for (int d = 0; d < n_; ++d)
      c[d] = int(std::lround((x[d] - origin_[d]) / h_));
    return c;
  }

 private:
  std::shared_ptr<const Domain> domain_;
  int n_ = 0;
  double h_ = 0;
  Point origin_;
  std::array<int, 3> counts_{1, 1, 1};
  std::vector<int> index_;               // flat lattice -> interior index or -1
  std::vector<Coords> interior_coords_;  // interior index -> lattice coords
};

/// Scalar field on the interior nodes of a grid, zero outside.
class DiscreteField {
 public:
  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const GridSpec> grid)
      : grid_(std::move(grid)), values_(Vector::Zero(grid_->num_interior())) {}
  DiscreteField(std::shared_ptr<const GridSpec> grid, Vector values)
      : grid_(std::move(grid)), values_(std::move(values)) {}

  const GridSpec& grid() const { return *grid_; }
  std::shared_ptr<const GridSpec> grid_ptr() const { return grid_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  /// Value with zero extension outside the interior set.
  double at(const Coords& c) const {
    long i = grid_->interior_index(c);
    return i < 0 ? 0.0 : values_[i];
  }

  /// Sample an analytic function on the interior nodes.
  static DiscreteField sample(std::shared_ptr<const GridSpec> grid,
                              const std::function<double(const Point&)>& f);

  /// Multilinear interpolation (zero extension).
  double interpolate(const Point& x) const;

 private:
  std::shared_ptr<const GridSpec> grid_;
  Vector values_;
};

struct StencilEntry {
  Coords offset;
  double coeff;
};

/// Stencil of (-Lap_h)^m, coefficients excluding the h^{-2m} scale.
std::vector<StencilEntry> polyharmonic_stencil(int n, int m);

/// O(h^2) centered difference stencil for d^beta (per-axis composition).
std::vector<StencilEntry> derivative_stencil(int n, const MultiIndex& beta);

/// Discrete (-Lap)^m with clamped (zero extension) boundary treatment.
/// Symmetric positive definite; the factorization (direct Cholesky for 2D
/// and small 3D problems, multigrid-preconditioned CG above that) is cached
/// and reused across right-hand sides.
class DiscreteOperator {
 public:
  enum class Backend { automatic, direct, multigrid };

  const GridSpec& grid() const { return *grid_; }
  std::shared_ptr<const GridSpec> grid_ptr() const { return grid_; }
  int order() const { return m_; }
  const SpMatRow& matrix() const { return A_; }
  bool uses_direct() const { return ldlt_ != nullptr; }

  DiscreteField apply(const DiscreteField& u) const;
  Vector solve_vector(const Vector& b) const;

  friend DiscreteOperator assemble_operator(std::shared_ptr<const GridSpec> grid,
                                            int m, DiscreteOperator::Backend backend);

 private:
  struct MgHierarchy;

  std::shared_ptr<const GridSpec> grid_;
  int m_ = 1;
  SpMatRow A_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMatCol>> ldlt_;
  std::shared_ptr<MgHierarchy> mg_;
};

DiscreteOperator assemble_operator(
    std::shared_ptr<const GridSpec> grid, int m,
    DiscreteOperator::Backend backend = DiscreteOperator::Backend::automatic);

/// Solve (-Lap_h)^m u = rhs to relative residual <= 1e-10.
DiscreteField solve_dirichlet(const DiscreteOperator& op, const DiscreteField& rhs);

struct GreenColumn {
  DiscreteField field;
  Point y;              // snapped source location
  Coords y_coords{};
  double snap_distance = 0;
};

/// Column of the discrete Green matrix: solve with a scaled single-node
/// impulse at the lattice node nearest to y.
GreenColumn discrete_green(const DiscreteOperator& op, const Point& y);

/// S_h(x, y) = G_h(x, y) - Gamma(x - y) on the nodes. The value at the
/// source node itself (where Gamma is singular) is replaced by the average
/// over the face neighbors.
DiscreteField regular_part(const GreenColumn& green, const DimensionParams& params,
                           double diam);

/// Single mixed partial d^beta at a node, centered O(h^2) differences with
/// zero extension.
double derivative_at(const DiscreteField& field, const Coords& c, const MultiIndex& beta);

/// Euclidean norm over all order-i derivative components (with multinomial
/// multiplicities), each additionally differentiated by `extra`:
/// |grad^i d^extra u| at a node.
double gradient_norm_at(const DiscreteField& field, const Coords& c, int i,
                        const MultiIndex& extra);

/// Field of |grad^i d^multi u| at every interior node. Stencils reaching
/// outside the interior set use zero extension; callers restrict to nodes at
/// least (i + |multi|) h from the boundary for consistency.
DiscreteField mixed_derivative(const DiscreteField& field, int i, const MultiIndex& multi);

/// Discrete energy seminorm: L2 norm of the vector of all order-m
/// derivatives, quadrature weight h^n.
double energy_norm(const DiscreteField& field, int m);

/// || v / |.-q|^m ||_L2 / || grad^m v ||_L2 for a boundary point q.
double hardy_ratio(const DiscreteField& field, int m, const Point& q);

/// Flat binary dump: one ASCII header line (dims, h, bounding box), then the
/// full-lattice values (zero outside the interior) as row-major 64-bit floats.
void dump_field(const DiscreteField& field, const std::string& path);

/// x,y,value CSV of a 2D field (or a z-slice of a 3D one).
void csv_slice(const DiscreteField& field, const std::string& path, int z_index = -1);

}  // namespace polygreen
