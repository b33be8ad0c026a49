#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagsol/curve.hpp"

namespace lagsol {

// Explicit expander data: r_j(y)^2 = 1/a_j + y^2,
// phi_j(y) = psi_j + int_0^y dt / ((1/a_j + t^2) sqrt(P(t))).
// u_star relates y to the reduced variable by u = u_star + y^2.
struct ExpanderProfile {
  double alpha = 0.0;
  std::vector<double> a;
  std::vector<double> psi;
  double u_star = 0.0;

  std::size_t n() const noexcept { return a.size(); }
};

void validate(const ExpanderProfile& profile);

struct ProfileValue {
  double y = 0.0;
  std::vector<double> r;
  std::vector<double> phi;
  double theta = 0.0;
};

struct AngleVector {
  std::vector<double> phibar;

  double sum() const;
};

struct PlaneReport {
  std::vector<double> L1;  // psi_j + phibar_j
  std::vector<double> L2;  // psi_j - phibar_j
  double sum = 0.0;
};

// P(t) = (prod(1 + a_k t^2) e^{alpha t^2} - 1) / t^2, P(0) = sum a + alpha.
double eval_P(double alpha, std::span<const double> a, double t);
double eval_P(const ExpanderProfile& profile, double t);
// log P(t), finite even where P overflows.
double log_P(double alpha, std::span<const double> a, double t);

ProfileValue profile_eval(const ExpanderProfile& profile, double y);
// Same values for many y, sharing the quadrature; output follows input order.
std::vector<ProfileValue> profile_eval(const ExpanderProfile& profile, std::span<const double> ys);

AngleVector asymptotic_angles(const ExpanderProfile& profile);
PlaneReport plane_report(const ExpanderProfile& profile);

AngleVector angle_map(double alpha, std::span<const double> a);
// d phibar_j / d log a_k.
Eigen::MatrixXd angle_map_log_jacobian(double alpha, std::span<const double> a);
// d phibar_j / d a_k.
Eigen::MatrixXd angle_map_jacobian(double alpha, std::span<const double> a);

struct InversionOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

struct InversionResult {
  std::vector<double> a;
  AngleVector achieved;
  double residual = 0.0;
  int iterations = 0;
};

// alpha > 0: the unique a with angle_map(alpha, a) = target.
// alpha = 0: the representative with a_1 + ... + a_n = 1.
// Throws InvalidTarget for targets outside the image, NonConvergence
// (with the last iterate in the message) otherwise.
InversionResult invert_angle_map(double alpha, const AngleVector& target,
                                 const InversionOptions& opt = {});

// Expander as a curve parametrized by y, with lambda_j = 1, C = 1.
class ExpanderCurve : public Curve {
 public:
  explicit ExpanderCurve(ExpanderProfile profile);
  const SolitonParams& params() const override { return params_; }
  std::vector<CurvePoint> points(std::span<const double> ys) const override;
  const ExpanderProfile& profile() const { return profile_; }

 private:
  ExpanderProfile profile_;
  SolitonParams params_;
};

// Columns y,r_1..r_n,phi_1..phi_n,theta.
void write_profile_csv(std::ostream& out, const std::vector<ProfileValue>& values);

}  // namespace lagsol
