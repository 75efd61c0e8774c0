#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace polygreen {

/// Error categories surfaced by library operations. The CLI maps
/// configuration problems to exit code 2 and failed checks to exit code 1.
enum class ErrorCode {
  point_outside_domain,
  dimension_out_of_range,
  singular_point,
  spec_mismatch,
  grid_too_coarse,
  factorization_failed,
  solver_diverged,
  point_too_close_to_boundary,
  too_close_to_boundary,
  coincident_points,
  zero_field,
  empty_input,
  invalid_parity,
  geometry_infeasible,
  config_invalid,
  io_failure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Points live in dimension 2..7 (grids use 2 or 3); fixedly sized to keep
/// geometry sampling allocation-free.
class Point {
 public:
  static constexpr int kMaxDim = 8;

  Point() : dim_(0) { v_.fill(0.0); }
  explicit Point(int dim) : dim_(dim) { v_.fill(0.0); }
  Point(std::initializer_list<double> xs) : dim_(int(xs.size())) {
    v_.fill(0.0);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }

  double norm2() const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += v_[i] * v_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  Point operator-(const Point& o) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r.v_[i] = v_[i] - o.v_[i];
    return r;
  }
  Point operator+(const Point& o) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r.v_[i] = v_[i] + o.v_[i];
    return r;
  }
  Point operator*(double s) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r.v_[i] = v_[i] * s;
    return r;
  }
  double dot(const Point& o) const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += v_[i] * o.v_[i];
    return s;
  }

 private:
  std::array<double, kMaxDim> v_;
  int dim_;
};

inline double dist(const Point& a, const Point& b) { return (a - b).norm(); }

constexpr double kPi = 3.14159265358979323846;

/// Surface area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace polygreen
