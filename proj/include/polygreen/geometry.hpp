#pragma once

#include <memory>
#include <string>
#include <vector>

#include "polygreen/common.hpp"
#include "polygreen/rng.hpp"

namespace polygreen {

enum class DomainKind {
  unit_ball,
  punctured_ball,
  annulus,
  ellipse,
  rectangle,
  l_shape,
};

std::string domain_kind_name(DomainKind k);
DomainKind domain_kind_from_name(const std::string& name);

/// Bounded domain with analytic boundary distance. Immutable; all queries
/// are pure.
class Domain {
 public:
  static Domain unit_ball(int n);
  static Domain punctured_ball(int n, double epsilon);
  static Domain annulus(int n, double r_in, double r_out);
  static Domain ellipse(double a, double b);          // n = 2
  static Domain rectangle(std::vector<double> sides); // n = 2 or 3
  static Domain l_shape(double a, double b);          // n = 2

  DomainKind kind() const { return kind_; }
  int dim() const { return n_; }
  const std::vector<double>& params() const { return params_; }

  bool membership(const Point& x) const;
  double distance_to_boundary(const Point& x) const;  // throws if outside
  Point nearest_boundary_point(const Point& x) const;
  double diameter() const;
  /// Width of the thinnest passage, used for grid-resolution checks.
  double narrowest_feature() const;
  void bounding_box(Point& lo, Point& hi) const;

  /// Uniform interior sample by rejection from the bounding box.
  Point sample_interior(CounterRng& rng) const;

 private:
  Domain(DomainKind k, int n, std::vector<double> params)
      : kind_(k), n_(n), params_(std::move(params)) {}

  DomainKind kind_;
  int n_;
  std::vector<double> params_;
};

/// Interior point pair with its boundary distances and separation.
struct SamplePair {
  Point x, y;
  double d_x = 0, d_y = 0, sep = 0;

  static SamplePair make(const Domain& dom, const Point& x, const Point& y);
};

enum class RegionCase { case_i, case_ii, case_iii };

std::string region_case_name(RegionCase c);

/// Threshold splitting pairs into far-field / near-diagonal / comparable
/// regimes; admissible range N >= 25.
struct RegionClassifier {
  double N = 25.0;

  static RegionClassifier make(double N);
};

/// case_i  iff sep >= N * min(d_x, d_y)
/// case_ii iff sep <= max(d_x, d_y) / N
/// case_iii otherwise; the first two are mutually exclusive.
RegionCase classify_region(const SamplePair& pair, const RegionClassifier& cls);

struct SamplePlan {
  int count = 100;
  uint64_t seed = 0;
  double min_sep = 0.0;
  /// Extra floor on boundary distances (solver exclusion zones); 0 = none.
  double min_bdist = 0.0;
  RegionClassifier classifier{};
};

struct PairSample {
  std::vector<SamplePair> pairs;
  std::vector<std::string> warnings;  // region-unreachable notes
};

/// Deterministic stratified pair sampling: aims for at least count/10 pairs
/// per region where the geometry allows it; emits a warning per region it
/// could not populate.
PairSample sample_interior_pairs(const Domain& domain, const SamplePlan& plan);

}  // namespace polygreen
