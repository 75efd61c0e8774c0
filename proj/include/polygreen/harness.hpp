#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polygreen/ball_oracle.hpp"
#include "polygreen/estimates.hpp"

namespace polygreen {

enum class LhsSource { solver, oracle };

/// End-to-end verification job: domain, dimension parameters, grid levels,
/// sample plan and the estimates to check.
struct VerificationRun {
  std::shared_ptr<const Domain> domain;
  DimensionParams params;
  std::vector<double> grid_levels;  // mesh widths, coarse to fine
  SamplePlan plan;
  std::vector<BoundSpec> specs;
  LhsSource lhs = LhsSource::solver;
  double exclusion_factor = 8.0;  // pairs closer than this many h are dropped
  /// Cap on distinct source points in solver mode (0 = one per pair); pair
  /// sources snap to the nearest of this many representatives so the
  /// factorization-reuse path stays the dominant cost.
  int y_cluster = 0;
  DiscreteOperator::Backend backend = DiscreteOperator::Backend::automatic;

  void validate() const;
};

std::string lhs_source_name(LhsSource s);
LhsSource lhs_source_from_name(const std::string& name);

/// Green-function estimates: LHS = |grad_x^i grad_y^j G|, RHS from the
/// estimate engine with constant 1; one report per spec.
std::vector<EstimateReport> verify_green_estimates(const VerificationRun& run);

/// Regular-part estimates: LHS = |grad_x^i grad_y^j (G - Gamma)|.
std::vector<EstimateReport> verify_regular_part(const VerificationRun& run);

struct CounterexampleReport {
  int m = 0, n = 0;
  int kappa = 0;   // order of the seed derivative
  int lambda = 0;
  std::vector<double> shell_radii;
  std::vector<double> sup_grad_lambda;        // per shell
  std::vector<double> sup_grad_lambda_plus1;  // per shell
  double grad_lambda_variation = 0;           // relative spread over shells
  double grad_plus1_exponent = 0;             // fitted growth exponent
  double directional_gap = 0;                 // normalized gap at the puncture
  double residual_inside_plateau = 0;         // |(-Lap)^m u| (relative) for |x| < 1/4
  double source_outside_annulus = 0;          // exact-support check
  double source_sup_annulus = 0;
  std::vector<double> energy_levels;          // discrete energy per grid level
  bool bounded_check = false;
  bool unbounded_check = false;
  bool gap_check = false;
  bool support_check = false;
};

/// Sharpness demonstration on the punctured ball: u = eta d^kappa Gamma with
/// kappa = lambda - 1, explored symbolically on dyadic shells 2^-k, k in
/// [k_min, k_max]. Requires odd n with lambda >= 1.
CounterexampleReport verify_counterexample(int m, int n, int k_min = 2, int k_max = 12,
                                           const std::vector<double>& energy_grid_levels = {});

struct DecayReport {
  std::vector<double> grid_levels;
  // per level: sup weighted constants for i = 0..lambda
  std::vector<std::vector<double>> c_pointwise;
  std::vector<double> c_sphere;     // per level
  double weight_selfcheck_error = 0;  // two-point formula identity
  double shell_exponent = 0;          // measured two-point exponent
  double fitted_far_exponent = 0;     // (decay-at-infinity only)
  bool stable = false;
  std::vector<std::string> notes;
};

/// Interior-growth control for sources away from an exterior point Q.
DecayReport verify_interior_decay(std::shared_ptr<const Domain> domain,
                                  const DimensionParams& params, const Point& Q, double R,
                                  const std::vector<double>& grid_levels,
                                  DiscreteOperator::Backend backend =
                                      DiscreteOperator::Backend::automatic);

/// Far-field decay for sources concentrated near an exterior point Q.
DecayReport verify_decay_at_infinity(std::shared_ptr<const Domain> domain,
                                     const DimensionParams& params, const Point& Q,
                                     double r, const std::vector<double>& grid_levels,
                                     DiscreteOperator::Backend backend =
                                         DiscreteOperator::Backend::automatic);

/// Place a point outside the domain at the given offset from the boundary,
/// along the outward normal at the boundary point nearest to `anchor`.
Point exterior_point_near_boundary(const Domain& domain, const Point& anchor,
                                   double offset = 1e-3);

struct DataTerm {
  MultiIndex alpha;
  std::function<double(const Point&)> f;
};

struct DirichletBoundReport {
  std::vector<double> grid_levels;
  std::vector<double> sup_ratio;       // per level: sup_x LHS/RHS
  std::vector<double> lp_constant;     // per level: Linf / sum of Lp norms
  double linearity_drift = 0;          // ratio change under 10x data scaling
  bool stable = false;
};

DirichletBoundReport verify_dirichlet_bound(std::shared_ptr<const Domain> domain,
                                            const DimensionParams& params,
                                            const std::vector<DataTerm>& data,
                                            const std::vector<double>& grid_levels,
                                            DiscreteOperator::Backend backend =
                                                DiscreteOperator::Backend::automatic);

struct HardyReport {
  std::vector<double> grid_levels;
  std::vector<double> max_ratio;  // per level
  bool stable = false;
};

HardyReport verify_hardy(std::shared_ptr<const Domain> domain, int m, int trials,
                         uint64_t seed, const std::vector<double>& grid_levels);

struct SymmetrySignReport {
  double max_asymmetry_rel = 0;
  double min_green_value = 0;  // over sampled pairs (sign demo)
  bool symmetric = false;
};

SymmetrySignReport verify_symmetry_and_sign(std::shared_ptr<const Domain> domain,
                                            const DimensionParams& params, double h,
                                            int sources, uint64_t seed,
                                            DiscreteOperator::Backend backend =
                                                DiscreteOperator::Backend::automatic);

/// Continuum mixed-derivative tensor norm of the oracle Green function (or
/// its regular part) by nested centered differences of the closed form.
double oracle_lhs(const BallOracle& oracle, const DimensionParams& params,
                  const Point& x, const Point& y, int i, int j, bool regular,
                  double diam);

}  // namespace polygreen
