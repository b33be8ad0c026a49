#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lagsol/params.hpp"
#include "lagsol/rk.hpp"

namespace lagsol {

// Initial data at s0 for the reduced system in (u, phi_j, theta).  The
// lambdas and alpha are read from params; C is assumed normalized.
struct TrajectorySpec {
  SolitonParams params;
  std::vector<double> alphas;  // alpha_j = r_j(s0)^2
  std::vector<double> phi0;
  double theta0 = 0.0;
  double s0 = 0.0;

  std::size_t n() const noexcept { return alphas.size(); }
  // Q(0)^(1/2) sin(phi(s0) - theta(s0)).
  double A() const;
};

void validate(const TrajectorySpec& spec);

struct ReducedState {
  double s = 0.0;
  double u = 0.0;
  std::vector<double> phis;
  double theta = 0.0;

  double phi() const noexcept;
};

struct ReducedDerivative {
  double du = 0.0;
  std::vector<double> dphis;
  double dphi = 0.0;
  double dtheta = 0.0;
};

struct FullState {
  double s = 0.0;
  std::vector<std::complex<double>> ws;
  double theta = 0.0;
  // arg w_j, lifted continuously from phi0.
  std::vector<double> args;
};

ReducedState initial_state(const TrajectorySpec& spec);

double eval_Q(const TrajectorySpec& spec, double u);

// Throws ValidationError when some alpha_j + lambda_j u <= 0.
ReducedDerivative reduced_rhs(const TrajectorySpec& spec, const ReducedState& state);

double first_integral(const TrajectorySpec& spec, const ReducedState& state);

// Right-hand side of the full system in (w_j, theta).
void full_rhs(const SolitonParams& params, std::span<const std::complex<double>> ws,
              double theta, std::span<std::complex<double>> dws, double& dtheta);

struct IntegrationOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = 0.0;
  // Reject a step of length h when the first integral moves by more than
  // invariant_factor * rtol * (1 + |A|) * h across it.  <= 0 disables.
  double invariant_factor = 0.1;
};

struct ReducedTrajectory {
  double A = 0.0;
  std::vector<ReducedState> samples;
  rk::Stats stats;
};

struct FullTrajectory {
  std::vector<FullState> samples;
  rk::Stats stats;
};

// Samples on `grid`, which may contain points on both sides of s0 in any
// order; the result follows the order of `grid`.
ReducedTrajectory integrate_reduced(const TrajectorySpec& spec, std::span<const double> grid,
                                    const IntegrationOptions& opt = {});
// `samples` equally spaced points from s0 to s_end inclusive.
ReducedTrajectory integrate_reduced(const TrajectorySpec& spec, double s_end, double tol = 1e-10,
                                    std::size_t samples = 201);

FullTrajectory integrate_full(const TrajectorySpec& spec, std::span<const double> grid,
                              const IntegrationOptions& opt = {});
FullTrajectory integrate_full(const TrajectorySpec& spec, double s_end, double tol = 1e-10,
                              std::size_t samples = 201);

// Equally spaced grid from a to b inclusive.
std::vector<double> linspace(double a, double b, std::size_t count);

// Columns s,u,phi_1..phi_n,theta,first_integral_residual.
void write_trajectory_csv(std::ostream& out, const TrajectorySpec& spec,
                          const ReducedTrajectory& traj);

}  // namespace lagsol

#include "lagsol/curve.hpp"

namespace lagsol {

// A reduced-ODE solution as a curve in s.  Checkpoints are stored every
// `spacing` over [s_min, s_max]; point queries integrate from the nearest
// checkpoint at tight tolerance.
class OdeCurve : public Curve {
 public:
  OdeCurve(TrajectorySpec spec, double s_min, double s_max, double spacing = 0.5,
           double rtol = 1e-13);

  const SolitonParams& params() const override { return spec_.params; }
  std::vector<CurvePoint> points(std::span<const double> ps) const override;
  // Reduced states at ps, with u measured from the original base point.
  std::vector<ReducedState> states(std::span<const double> ps) const;
  const TrajectorySpec& spec() const { return spec_; }

 private:
  TrajectorySpec spec_;
  std::vector<ReducedState> checkpoints_;
  double rtol_;
};

}  // namespace lagsol
