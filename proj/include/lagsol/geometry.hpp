#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lagsol/curve.hpp"

namespace lagsol {

using CVec = std::vector<std::complex<double>>;

// A point of L: quadric coordinates x (n entries on sum lambda_j x_j^2 = C
// for centred curves, n-1 free entries for translators) and curve parameter p.
struct AmbientPoint {
  CVec z;
  std::vector<double> x;
  double p = 0.0;
};

struct Frame {
  std::vector<CVec> f;  // f_1..f_n; f_n is the image of d/ds
  Eigen::MatrixXd g;    // g_ab = Re <f_a, f_b>
  std::complex<double> det_f;
  double theta = 0.0;  // profile angle at p
};

// <u, v> = Re sum u_l conj(v_l); J is multiplication by i.
double inner(const CVec& u, const CVec& v);
// omega(u, v) = <u, J v>.
double omega(const CVec& u, const CVec& v);

AmbientPoint immerse(const Curve& curve, const std::vector<double>& x, double p);
AmbientPoint immerse(const CurvePoint& cp, const Curve& curve, const std::vector<double>& x);

// Oriented orthonormal basis e_1..e_n of R^n with e_n the unit normal
// (lambda_j x_j) / |.| of the quadric.  Throws ValidationError if all
// lambda_j x_j vanish.
Eigen::MatrixXd quadric_basis(const std::vector<double>& lambdas, const std::vector<double>& x);

Frame frame_at(const Curve& curve, const std::vector<double>& x, double p);
Frame frame_at(const CurvePoint& cp, const Curve& curve, const std::vector<double>& x);

// max |omega(f_j, f_k)| / (|f_j| |f_k|).
double lagrangian_residual(const Frame& fr);
// |arg det f - theta| reduced mod 2 pi.
double lagrangian_angle_residual(const Frame& fr);
double lagrangian_angle_residual(const Curve& curve, const std::vector<double>& x, double p);

// Orthogonal projection of a vector onto the normal space J(TL) = span{J f_k}.
CVec normal_projection(const Frame& fr, const CVec& v);

// F^perp by projecting the position vector; the centred closed form
// (C r_1..r_n sin(phi - theta) / g_nn) J f_n is returned in `closed_form`
// when the curve is not a translator.
struct NormalF {
  CVec projected;
  std::optional<CVec> closed_form;
  double tangential_check = 0.0;  // max_l<n |<F, J f_l>| / (|F| |f_l|)
};
NormalF normal_projection_F(const Curve& curve, const std::vector<double>& x, double p);

// H = (dtheta/ds / g_nn) J f_n for centred curves.
CVec mean_curvature_formula(const Frame& fr, const CurvePoint& cp, const Curve& curve);

// Mean curvature by central differences of the immersion in local
// coordinates (quadric chart, p), Richardson-extrapolated over (h, h/2).
// h <= 0 selects 1e-3 (1 + |u|)^(1/2) with |u| estimated from max |w_j|^2.
CVec mean_curvature_fd(const Curve& curve, const std::vector<double>& x, double p, double h = 0.0);

double norm(const CVec& v);
CVec axpy(double a, const CVec& x, const CVec& y);  // a x + y

// T^perp for T = (0, ..., 0, alpha).
CVec translator_T_perp(const Frame& fr, double alpha);

struct MaslovFit {
  double c = 0.0;
  double max_residual = 0.0;
};
// theta + <JT, F> = theta + alpha Im z_n should be constant on translators.
MaslovFit maslov_angle_check(const Curve& curve, const std::vector<std::pair<std::vector<double>, double>>& samples);

struct ResidualRow {
  std::size_t point_id = 0;
  double p = 0.0;
  double lagrangian = 0.0;
  double angle = 0.0;
  double soliton = 0.0;
  double h_norm = 0.0;
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  double max_lagrangian = 0.0;
  double max_angle = 0.0;
  double max_soliton = 0.0;
};

// Residuals at each sample.  `soliton` is |alpha F^perp - C H_fd| / |H_fd|
// (centred), |H_fd - T^perp| / max(|H_fd|, |T^perp|) (translator), or |H_fd|
// when alpha = 0.  With with_soliton = false only the frame checks run.
ResidualReport residual_report(const Curve& curve,
                               const std::vector<std::pair<std::vector<double>, double>>& samples,
                               bool with_soliton = true);

void write_residual_csv(std::ostream& out, const ResidualReport& report);

// Points on sum lambda_j x_j^2 = C for lambda_j = +-1 (sorted positives
// first): x+ = sqrt|C| cosh(rho) w+, x- = sqrt|C| sinh(rho) w- (roles swap
// for C < 0; C = 0 gives the cone).  rho uniform in [0, rho_max], directions
// uniform on spheres; fixed-seed deterministic.
std::vector<std::vector<double>> sample_quadric(const std::vector<double>& lambdas, double C,
                                                std::size_t count, double rho_max, std::uint64_t seed);

}  // namespace lagsol
