#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagsol/curve.hpp"
#include "lagsol/reduced_ode.hpp"

namespace lagsol {

enum class CaseTag { i, ii };
std::string to_string(CaseTag c);

// Data of a bounded orbit, re-based so that the critical point of
// G(u) = Q(u) e^{alpha u} sits at u = 0.  params must be normalized
// (C = 1, lambda_j = +-1, positives first).  Besides the geometric cases
// (all lambda_j = +1 with alpha < 0, or 1 <= m < n) the formal case m = 0
// with alpha > 0 is accepted, where only the holonomy map makes sense.
struct PeriodicSpec {
  SolitonParams params;
  std::vector<double> alphas;
  double A = 0.0;

  std::size_t n() const noexcept { return alphas.size(); }
  double beta1() const;  // -inf when there is no positive lambda
  double beta2() const;  // +inf when there is no negative lambda
  // log G(u) - log G(0), accurate for small u.
  double log_G_rel(double u) const;
  double log_G0() const;
};

// Root of sum lambda_j / (alpha_j + lambda_j u) + alpha on (beta1, beta2).
double critical_point(const SolitonParams& params, std::span<const double> alphas);

// Re-bases (alphas, A), given at an arbitrary base point, so that u_* = 0:
// alpha_j -> alpha_j + lambda_j u_*, A -> A e^{-alpha u_*/2}.
PeriodicSpec make_periodic_spec(const SolitonParams& params, std::vector<double> alphas, double A);
PeriodicSpec make_periodic_spec(const TrajectorySpec& spec);

// Throws ValidationError unless spec is normalized, u_* = 0 to 1e-10 and
// 0 < A <= G(0)^{1/2} (1 + 1e-12).
void validate(const PeriodicSpec& spec);

CaseTag classify_case(const PeriodicSpec& spec);

// Initial data at s = 0 with u = 0, phi_j = psi_j and u increasing.
TrajectorySpec trajectory_spec(const PeriodicSpec& spec, std::span<const double> psi = {});

// Explicit case-(i) solution: u = 0, phi_j = psi_j - lambda_j A s / alpha_j,
// theta = sum psi - pi/2 + alpha A s.
class HamiltonianStationary : public Curve {
 public:
  HamiltonianStationary(PeriodicSpec spec, std::vector<double> psi);

  const SolitonParams& params() const override { return spec_.params; }
  std::vector<CurvePoint> points(std::span<const double> ss) const override;
  ReducedState state(double s) const;
  const PeriodicSpec& spec() const { return spec_; }

 private:
  PeriodicSpec spec_;
  std::vector<double> psi_;
};

struct TurningPoints {
  double u1 = 0.0;
  double u2 = 0.0;
};

TurningPoints turning_points(const PeriodicSpec& spec);
double period(const PeriodicSpec& spec, const TurningPoints& tp, double rel_tol = 1e-12);
std::vector<double> holonomies(const PeriodicSpec& spec, const TurningPoints& tp, double rel_tol = 1e-12);
// Limits as A -> G(0)^{1/2} from below.
std::vector<double> limit_gamma(const PeriodicSpec& spec);
double limit_period(const PeriodicSpec& spec);

struct PeriodicOrbit {
  double u1 = 0.0;
  double u2 = 0.0;
  double S = 0.0;
  std::vector<double> gamma;
  CaseTag case_tag = CaseTag::ii;
  // Set when (G(0) - A^2)/G(0) < 1e-10 in case (ii).
  std::optional<std::string> warning;
};

// Case (ii): turning points, period and holonomies by quadrature.
// Case (i): u1 = u2 = 0, and S, gamma are the small-oscillation limits
// (the exact phase advance over that S).
PeriodicOrbit compute_orbit(const PeriodicSpec& spec);

struct Periodicity {
  bool periodic = false;
  long r = 0;
  std::vector<long> p;     // gamma_j ~ 2 pi p_j / r (case ii), integer q_j (case i)
  double mu = 0.0;         // case (i) only
  double T = 0.0;          // period of (w_1..w_n) when periodic
  std::string topology;
};

std::string topology_tag(const SolitonParams& params);

// Case (ii): smallest r <= qmax with |gamma_j - 2 pi p_j / r| < tol for all j,
// from continued-fraction convergents.  Case (i): rationality of the ratios
// lambda_j/alpha_j.  tol <= 0 selects 1e-9 * qmax.
Periodicity detect_periodicity(const PeriodicSpec& spec, const PeriodicOrbit& orbit, double tol = 0.0,
                               long qmax = 64);

// Convergents p/q of x with q <= qmax; returns the first with |x - p/q| < tol.
std::optional<std::pair<long, long>> rational_approx(double x, double tol, long qmax);

// Holonomy map on (alphas, A) directly, without the u_* = 0 re-basing.
std::vector<double> holonomy_map(const SolitonParams& params, std::span<const double> alphas, double A);

// Derivative of the holonomy map restricted to the tangent space of
// sum lambda_j/alpha_j + alpha = 0 (n - 1 directions) together with A.
Eigen::MatrixXd holonomy_jacobian(const PeriodicSpec& spec, double h = 1e-6);

struct ReductionRow {
  double large = 0.0;             // the parameter sent to infinity
  std::vector<double> gamma;
  double deviation = 0.0;         // max |gamma_j - reduced_j| over kept j
  double dropped = 0.0;           // |gamma| of the dropped index
};

// Compares holonomies along a path with the reduced (n-1) holonomies.
// drop_last selects which index is sent to infinity (last or first).
std::vector<ReductionRow> reduction_check(std::span<const PeriodicSpec> path,
                                          std::span<const double> reduced_gamma, bool drop_last);

struct SearchOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
};

struct SearchResult {
  PeriodicSpec spec;
  std::vector<double> gamma;
  double residual = 0.0;
  int iterations = 0;
};

// Newton solve of holonomy_map = target over the constraint manifold,
// continued from a seed whose small-oscillation limit points along the
// target.  Rank-deficient steps use the minimum-norm least-squares update.
SearchResult periodic_search(const SolitonParams& params, std::span<const double> target,
                             const std::optional<PeriodicSpec>& seed = std::nullopt,
                             const SearchOptions& opt = {});

// Level set sum lambda_j x_j^2 = t of the construction.
struct FlowMember {
  double t = 0.0;
  SolitonParams params;  // C = t (cone for t = 0)
  std::string topology;
  bool singular_at_origin = false;
};

FlowMember brakke_member(const SolitonParams& params, double t);

// Columns u1,u2,S,gamma_1..gamma_n,case_tag,periodic_r,topology_tag.
void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit, const Periodicity& per);

}  // namespace lagsol
