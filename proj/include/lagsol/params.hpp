#pragma once

#include <cstddef>
#include <vector>

namespace lagsol {

// Construction constants of the centred-quadric ansatz: the curve
// (w_1..w_n) sweeps the quadric sum_j lambda_j x_j^2 = C, and alpha is the
// soliton constant in alpha F^perp = C H.
struct SolitonParams {
  std::vector<double> lambdas;
  double C = 1.0;
  double alpha = 0.0;

  std::size_t n() const noexcept { return lambdas.size(); }
  // Number of positive lambda_j.
  std::size_t m() const noexcept;
  bool is_normalized() const noexcept;
};

// Throws ValidationError on an empty lambda list, zero lambda_j or zero C.
void validate(const SolitonParams& p);

// Substitution factors relating a solution of one parameter set to the
// same Lagrangian written in another.  New quantities are obtained as
//   s~ = s_factor * s,  u~ = u_factor * u,  A~ = A_factor * A,
//   alpha~ = alpha_factor * alpha,
//   w~_j = w_factors[j] * w_{perm[j]},  x~_j = x_factors[j] * x_{perm[j]},
//   alpha~_j = alphaj_factors[j] * alpha_{perm[j]},
// angles phi~_j = phi_{perm[j]} and theta~ = theta.
struct ScalingRecord {
  std::size_t n = 0;
  std::vector<std::size_t> perm;
  double s_factor = 1.0;
  double u_factor = 1.0;
  double A_factor = 1.0;
  double alpha_factor = 1.0;
  std::vector<double> w_factors;
  std::vector<double> x_factors;
  std::vector<double> alphaj_factors;

  static ScalingRecord identity(std::size_t n);

  // The record undoing this one.
  ScalingRecord inverse() const;
  // Apply `first`, then `*this`.
  ScalingRecord compose_after(const ScalingRecord& first) const;

  bool approx_equal(const ScalingRecord& other, double rel_tol) const;
};

struct Normalized {
  SolitonParams params;
  ScalingRecord record;
};

// lambda_j -> C lambda_j / |C lambda_j|, C -> 1, alpha -> alpha / C, with the
// positive signs sorted first (stable).  The record maps original
// quantities to normalized ones.
Normalized normalize(const SolitonParams& params);

// Compose the dilation L -> tL into `record`:
// alpha -> t^-2 alpha, s -> t^(n-2) s, w_j -> t w_j, u -> t^2 u,
// alpha_j -> t^2 alpha_j, A -> t^n A.
ScalingRecord rescale_solution(const ScalingRecord& record, double t);

}  // namespace lagsol
