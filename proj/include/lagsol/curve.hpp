#pragma once

#include <complex>
#include <span>
#include <vector>

#include "lagsol/params.hpp"

namespace lagsol {

// Profile data at one curve parameter p (s itself, or y for the explicit
// families).  Derivatives are with respect to p; ds_dp converts to s.
struct CurvePoint {
  double p = 0.0;
  std::vector<std::complex<double>> w;
  std::vector<std::complex<double>> dw;
  double theta = 0.0;
  double ds_dp = 1.0;
  // Last coordinate offset of the translator family; unused otherwise.
  std::complex<double> beta{};
  std::complex<double> dbeta{};
};

// A solution (w_1..w_k, theta[, beta]) of the soliton system, evaluated in
// batches so ODE-backed implementations can share integration work.
class Curve {
 public:
  virtual ~Curve() = default;

  // lambdas and alpha of the curve's system; C is ignored.
  virtual const SolitonParams& params() const = 0;
  // True for the translating family, where the immersion appends
  // -1/2 sum lambda_j x_j^2 + beta as a last coordinate.
  virtual bool is_translator() const { return false; }
  virtual std::vector<CurvePoint> points(std::span<const double> ps) const = 0;

  CurvePoint point(double p) const { return points(std::span<const double>(&p, 1)).front(); }
  std::size_t dim() const { return params().n() + (is_translator() ? 1 : 0); }
};

}  // namespace lagsol
