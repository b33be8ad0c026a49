#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "lagsol/curve.hpp"
#include "lagsol/expander.hpp"
#include "lagsol/geometry.hpp"
#include "lagsol/periodic.hpp"

namespace lagsol {

// Bounded-orbit base with its initial phases (empty psi means zeros).
struct PeriodicBase {
  PeriodicSpec spec;
  std::vector<double> psi;
};

// Translating soliton in C^n built on an (n-1)-dimensional base curve
// (w_1..w_{n-1}, theta).  The immersion is
//   (x_1 w_1, ..., x_{n-1} w_{n-1}, -1/2 sum lambda_j x_j^2 + beta),
// translating with T = (0, ..., 0, alpha).
struct TranslatorProfile {
  double alpha = 0.0;
  std::variant<ExpanderProfile, PeriodicBase> base;
  std::complex<double> K{};
  double A = 0.0;  // first integral of the base

  std::size_t n() const;
  bool explicit_base() const { return std::holds_alternative<ExpanderProfile>(base); }
};

void validate(const TranslatorProfile& profile);

// Profile on the explicit base with psi = 0 and K = -u_star/2, so that
// the last coordinate is 1/2 y^2 - 1/2 sum x_j^2 - (i/alpha) theta(y);
// for alpha = 0 its imaginary part is int_0^y dt / sqrt(P(t)).
TranslatorProfile corollary_I_profile(double alpha, std::vector<double> a);

// Profile on a periodic base.  K defaults to -u_star/2 = 0.
TranslatorProfile periodic_translator(PeriodicSpec spec, std::vector<double> psi = {},
                                      std::complex<double> K = {});

// beta at the curve parameter (y for the explicit base, s otherwise).
// alpha != 0: 1/2 u - (i/alpha) theta + K.  alpha = 0: 1/2 u - i A s + K,
// with s from quadrature on the explicit base.
std::complex<double> beta_eval(const TranslatorProfile& profile, double p);

// L + t T: the same profile with K shifted by t alpha.
TranslatorProfile translate(const TranslatorProfile& profile, double t);

class TranslatorCurve : public Curve {
 public:
  // [s_min, s_max] is the checkpoint range of an ODE-backed periodic base;
  // it is ignored for the explicit base and the case (i) base.
  explicit TranslatorCurve(TranslatorProfile profile, double s_min = -20.0, double s_max = 20.0);

  const SolitonParams& params() const override { return base_->params(); }
  bool is_translator() const override { return true; }
  std::vector<CurvePoint> points(std::span<const double> ps) const override;

  const TranslatorProfile& profile() const { return profile_; }
  const Curve& base() const { return *base_; }

 private:
  TranslatorProfile profile_;
  std::shared_ptr<const Curve> base_;
};

struct TranslatorReport {
  ResidualReport residuals;
  MaslovFit maslov;
  double c_expected = 0.0;  // alpha Im K
  double c_error = 0.0;
};

// H_fd against T^perp and the angle identity theta + alpha Im z_n = c.
// Throws ValidationError for alpha = 0.
TranslatorReport translator_soliton_residual(const TranslatorCurve& curve,
                                             const std::vector<std::pair<std::vector<double>, double>>& samples);

struct TranslatorFlags {
  bool injective = false;             // Im beta strictly monotone
  double im_beta_slope_sign = 0.0;    // sign of -A
  bool sampled_monotone = false;      // checked on the given parameters
  bool infinite_oscillation = false;  // theta drifts by sum gamma per period
  double theta_drift = 0.0;
};

TranslatorFlags translator_flags(const TranslatorCurve& curve, std::span<const double> ps);

// Lagrangian angle range of the explicit family: theta runs between
// sum psi + sum phibar (y -> +inf) and sum psi + pi - sum phibar (y -> -inf).
struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
  double oscillation = 0.0;
  double phibar_sum = 0.0;
};

AngleRange angle_range(const TranslatorProfile& profile);

// Distance from the point at (x, y) to L1 (y > 0, angles psi_j + phibar_j)
// or L2 (y < 0, angles psi_j - phibar_j), divided by |y|.  Explicit base only.
double asymptotic_ratio(const TranslatorCurve& curve, const std::vector<double>& x, double y);

}  // namespace lagsol
