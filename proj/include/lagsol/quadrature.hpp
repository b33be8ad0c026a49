#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lagsol/errors.hpp"

namespace lagsol::quad {

// Adaptive 31-point Gauss-Kronrod on a finite interval.  The interval is
// mapped onto [0, 1] first: Boost compares the error of the rescaled rule
// against a tolerance scaled by the interval length, which otherwise forces
// full-depth recursion on short intervals.  Throws ToleranceFailure on a
// non-finite result or a grossly unconverged error estimate.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 18) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (a == b) return 0.0;
  const double len = b - a;
  auto g = [&](double x) { return f(a + len * x) * len; };
  double err = 0.0;
  double l1 = 0.0;
  const double value = GK::integrate(g, 0.0, 1.0, max_depth, rel_tol, &err, &l1);
  if (!std::isfinite(value)) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "quadrature produced a non-finite value on [%.6g, %.6g]", a, b);
    throw ToleranceFailure(buf);
  }
  const double scale = std::max({std::abs(value), std::abs(l1), 1e-300});
  if (err > std::max(1e4 * rel_tol, 1e-8) * scale && err > 1e-13) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "quadrature error estimate %.3g exceeds tolerance (value %.6g) on [%.6g, %.6g]",
                  err, value, a, b);
    throw ToleranceFailure(buf);
  }
  return value;
}

}  // namespace lagsol::quad
