#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polygreen/fundamental.hpp"
#include "polygreen/geometry.hpp"
#include "polygreen/solver.hpp"

namespace polygreen {

enum class BoundTarget {
  green_odd_high,    // |x-y|^{-(n-2m+i+j)} with distance prefactor
  green_odd_low,     // adds the near-diagonal min{sep/d,1}^{n-2m+i+j} factor
  green_even,        // low form times log(1 + min(d)/sep)
  regular_odd_high,  // max{d_x,d_y,sep}^{-(n-2m+i+j)}
  regular_odd_low,
  regular_even,      // low form times log(1 + diam/max{d_x,d_y,sep})
};

std::string bound_target_name(BoundTarget t);
BoundTarget bound_target_from_name(const std::string& name);
bool bound_target_is_regular(BoundTarget t);

/// Which estimate to evaluate, with the derivative orders (i in x, j in y).
struct BoundSpec {
  BoundTarget target = BoundTarget::green_odd_high;
  int i = 0;
  int j = 0;

  /// Throws spec_mismatch naming the admissible range when the combination
  /// (target parity, i, j) is not covered for these dimension parameters.
  void validate(const DimensionParams& params) const;
  std::string label() const;
};

/// All admissible specs of a family for given params, restricted to
/// i, j <= cap (cap < 0 means the full range up to lambda).
std::vector<BoundSpec> admissible_bound_specs(const DimensionParams& params,
                                              bool regular, int cap = -1);

/// Right-hand side of the Green-function estimate with constant 1.
double bound_rhs_green(const BoundSpec& spec, const DimensionParams& params,
                       const SamplePair& pair);

/// Right-hand side of the regular-part estimate with constant 1.
double bound_rhs_regular(const BoundSpec& spec, const DimensionParams& params,
                         const SamplePair& pair, double diam);

/// Smooth radial bump: 1 on B_{1/4}, supported in B_{1/2}; derivative sup
/// bounds up to order 2m precomputed.
struct CutoffFunction {
  sym::CutoffProfile profile;
  std::vector<double> deriv_sup;  // deriv_sup[k] = sup |psi^(k)|

  static CutoffFunction make(int m);
};

/// Green columns at y and at the source stencil y +/- h e_d, enough for
/// first-order y-derivatives by centered differencing.
struct GreenStencil {
  GreenColumn center;
  std::vector<std::array<GreenColumn, 2>> axis;  // [d][0]=minus, [1]=plus

  /// d^alpha_y G_h(., y) at an interior node (|alpha| <= 1).
  double dy_green_at(const Coords& c, const MultiIndex& alpha) const;
};

GreenStencil green_stencil(const DiscreteOperator& op, const Point& y, int max_j);

/// Corrector field: d^alpha_y G_h minus the cutoff-masked singular model
/// eta((x-y)/d(y)) (P log(d(y)/|x-y|) + Q). The value at the source node is
/// filled with the face-neighbor average.
DiscreteField corrector_field(const DimensionParams& params, const MultiIndex& alpha,
                              const Domain& domain, const CutoffFunction& cutoff,
                              const GreenStencil& stencil);

/// Source of the corrector: the commutator -[(-Lap)^m, eta] applied to the
/// singular model, computed symbolically. Supported exactly in the annulus
/// d(y)/4 <= |x-y| <= d(y)/2.
DiscreteField corrector_source(const DimensionParams& params, const MultiIndex& alpha,
                               const Point& y, std::shared_ptr<const GridSpec> grid,
                               const CutoffFunction& cutoff);

/// Weighted potential of the data: odd n
///   sum_alpha int d(y)^{lambda-|alpha|} |f_alpha(y)| / |x-y| dy,
/// even n with the log(1 + d(y)/|x-y|) kernel. Grid quadrature; the cell
/// containing x gets an exact kernel integral.
double dirichlet_rhs(const DimensionParams& params, const Point& x,
                     const std::vector<std::pair<MultiIndex, DiscreteField>>& data,
                     const Domain& domain);

struct PairRecord {
  Point x, y;
  double d_x = 0, d_y = 0, sep = 0;
  RegionCase region = RegionCase::case_iii;
  double lhs = 0, rhs = 0, ratio = 0;
};

struct LevelStats {
  double h = 0;
  std::array<double, 3> sup_ratio{0, 0, 0};  // per region case
  std::array<long, 3> count{0, 0, 0};
  double sup_overall = 0;
  long total = 0;
};

/// Per-spec verdict: per-level and per-region sup ratios plus the
/// refinement-stability flag (factor <= 2 between consecutive levels).
struct EstimateReport {
  BoundSpec spec;
  std::vector<std::vector<PairRecord>> level_records;
  std::vector<LevelStats> levels;
  bool refinement_stable = false;
  double estimated_constant = 0;  // finest-level overall sup ratio

  bool all_finite() const;
};

/// Reduce per-level record sets into the report. Throws empty_input when no
/// level carries records.
EstimateReport ratio_statistics(const BoundSpec& spec,
                                const std::vector<std::vector<PairRecord>>& per_level,
                                const std::vector<double>& hs);

}  // namespace polygreen
