#pragma once

#include <array>
#include <cmath>

namespace polygreen {

/// Truncated Taylor polynomial of order N around an expansion point: exact
/// derivative propagation for smooth compositions (used for the cutoff
/// profile, whose high derivatives are hopeless to reach by differencing).
template <int N>
struct Jet {
  std::array<double, N + 1> c{};  // c[k] = f^{(k)}(x0) / k!

  static Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  static Jet variable(double v) {
    Jet j;
    j.c[0] = v;
    if (N >= 1) j.c[1] = 1.0;
    return j;
  }

  Jet operator+(const Jet& o) const {
    Jet r;
    for (int k = 0; k <= N; ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  Jet operator-(const Jet& o) const {
    Jet r;
    for (int k = 0; k <= N; ++k) r.c[k] = c[k] - o.c[k];
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) r.c[i + j] += c[i] * o.c[j];
    return r;
  }
  Jet operator*(double s) const {
    Jet r;
    for (int k = 0; k <= N; ++k) r.c[k] = c[k] * s;
    return r;
  }
  Jet operator/(const Jet& o) const {
    // power-series division, o.c[0] != 0
    Jet r;
    for (int k = 0; k <= N; ++k) {
      double s = c[k];
      for (int j = 1; j <= k; ++j) s -= o.c[j] * r.c[k - j];
      r.c[k] = s / o.c[0];
    }
    return r;
  }

  /// k-th derivative value.
  double deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }
};

/// exp of a jet via the ODE (e^u)' = u' e^u.
template <int N>
Jet<N> jet_exp(const Jet<N>& u) {
  Jet<N> r;
  r.c[0] = std::exp(u.c[0]);
  for (int k = 1; k <= N; ++k) {
    double s = 0;
    for (int j = 1; j <= k; ++j) s += j * u.c[j] * r.c[k - j];
    r.c[k] = s / k;
  }
  return r;
}

}  // namespace polygreen
