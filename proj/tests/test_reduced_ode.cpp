#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lagsol/errors.hpp"
#include "lagsol/reduced_ode.hpp"

using namespace lagsol;
using std::numbers::pi;

namespace {
TrajectorySpec make(std::vector<double> lam, double alpha, std::vector<double> alphas,
                    std::vector<double> phi0, double theta0) {
  return {{std::move(lam), 1.0, alpha}, std::move(alphas), std::move(phi0), theta0, 0.0};
}
}  // namespace

TEST_CASE("eval_Q") {
  CHECK(eval_Q(make({1, 1}, 0, {1, 1}, {0, 0}, 0), 0.0) == 1.0);
  CHECK(eval_Q(make({1, -1}, 0, {1, 2}, {0, 0}, 0), 1.0) == 2.0);
  CHECK(eval_Q(make({1, 1, 1}, 0, {1, 1, 1}, {0, 0, 0}, 0), -1.0) == 0.0);
}

TEST_CASE("reduced_rhs on explicit data") {
  // sin(phi - theta) = 1, cos = 0: the Hamiltonian stationary slopes -lambda_j A / alpha_j
  auto spec = make({1, -1}, 0, {1, 1}, {pi / 4, pi / 4}, 0.0);
  auto d = reduced_rhs(spec, initial_state(spec));
  CHECK(std::abs(d.du) < 1e-15);
  CHECK(d.dphis[0] == doctest::Approx(-1.0));
  CHECK(d.dphis[1] == doctest::Approx(1.0));
  CHECK(d.dtheta == 0.0);
  CHECK(first_integral(spec, initial_state(spec)) == doctest::Approx(1.0));

  auto flat = make({1, 1}, 2.0, {2, 3}, {0.3, 0.2}, 0.5);
  auto f = reduced_rhs(flat, initial_state(flat));
  CHECK(f.du == doctest::Approx(2.0 * std::sqrt(6.0)));
  CHECK(f.dphis[0] == 0.0);
  CHECK(f.dtheta == 0.0);

  ReducedState out{0.0, -3.0, {0, 0}, 0.0};
  CHECK_THROWS_AS(reduced_rhs(flat, out), ValidationError);
}

TEST_CASE("reduced_rhs matches finite differences of an integrated trajectory") {
  auto spec = make({1, -1, 1}, -0.7, {1.2, 0.9, 1.7}, {0.3, -0.2, 0.8}, 0.1);
  const double s = 0.4, h = 2e-4;
  std::vector<double> grid{s - h, s, s + h};
  IntegrationOptions opt;
  opt.rtol = 1e-13;
  opt.atol = 1e-15;
  auto tr = integrate_reduced(spec, grid, opt);
  auto d = reduced_rhs(spec, tr.samples[1]);
  const auto& a = tr.samples[0];
  const auto& b = tr.samples[2];
  CHECK(std::abs((b.u - a.u) / (2 * h) - d.du) < 1e-5);
  for (int j = 0; j < 3; ++j) CHECK(std::abs((b.phis[j] - a.phis[j]) / (2 * h) - d.dphis[j]) < 1e-5);
  CHECK(std::abs((b.theta - a.theta) / (2 * h) - d.dtheta) < 1e-5);
}

TEST_CASE("integration of special data") {
  SUBCASE("Hamiltonian stationary: u stays at 0") {
    auto spec = make({1, -1}, 0, {1, 1}, {pi / 4, pi / 4}, 0.0);
    auto tr = integrate_reduced(spec, 10.0);
    for (const auto& st : tr.samples) {
      CHECK(std::abs(st.u) < 1e-10);
      CHECK(std::abs(st.phis[0] - (pi / 4 - st.s)) < 1e-9);
    }
  }
  SUBCASE("A = 0: angles frozen") {
    auto spec = make({1, 1}, 1.0, {1, 2}, {0.2, 0.3}, 0.5);
    auto tr = integrate_reduced(spec, 0.3, 1e-10, 11);
    for (const auto& st : tr.samples) {
      CHECK(std::abs(st.phis[0] - 0.2) < 1e-12);
      CHECK(std::abs(st.theta - 0.5) < 1e-12);
    }
  }
  SUBCASE("oscillation between turning points of G = A^2") {
    // lambda = (1,-1), alpha = 0, alphas = (1,2): G(u) = (1+u)(2-u); A = 0.9 sqrt 2.
    const double A = 0.9 * std::sqrt(2.0);
    const double d = std::asin(A / std::sqrt(2.0));
    auto spec = make({1, -1}, 0, {1, 2}, {d, 0.0}, 0.0);
    CHECK(spec.A() == doctest::Approx(A));
    auto tr = integrate_reduced(spec, 20.0, 1e-10, 4001);
    double lo = 1e9, hi = -1e9;
    for (const auto& st : tr.samples) {
      lo = std::min(lo, st.u);
      hi = std::max(hi, st.u);
    }
    // roots of (1+u)(2-u) = A^2
    const double disc = std::sqrt(9.0 - 4.0 * A * A);
    CHECK(lo == doctest::Approx((1.0 - disc) / 2).epsilon(1e-5));
    CHECK(hi == doctest::Approx((1.0 + disc) / 2).epsilon(1e-5));
  }
}

TEST_CASE("domain escape is reported") {
  // A = 0 with du/ds = 2 sqrt(Q) > 0 and lambda_2 = -1 runs into alpha_2 - u = 0.
  auto spec = make({1, -1}, 0.0, {1, 1}, {0, 0}, 0.0);
  CHECK_THROWS_AS(integrate_reduced(spec, 5.0), DomainEscape);
  try {
    integrate_reduced(spec, 5.0);
  } catch (const DomainEscape& e) {
    CHECK(e.s() > 0.0);
    CHECK(e.s() < 5.0);
  }
  // n = 3 expander data blows up in finite s.
  auto blow = make({1, 1, 1}, 0.0, {1, 1, 1}, {0, 0, 0}, 0.0);
  CHECK_THROWS_AS(integrate_reduced(blow, 50.0), DomainEscape);
}

TEST_CASE("reduced and full integrators agree, first integral conserved") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.5, 2.0), uphi(-pi, pi), ualpha(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const std::size_t n = 2 + k % 2;
    std::vector<double> lam(n, 1.0), alphas(n), phi0(n);
    for (std::size_t j = 0; j < n; ++j) {
      alphas[j] = ua(rng);
      phi0[j] = uphi(rng);
    }
    lam.back() = -1.0;
    auto spec = make(lam, ualpha(rng), alphas, phi0, uphi(rng));
    std::vector<double> grid = linspace(-1.0, 1.0, 21);
    ReducedTrajectory r;
    FullTrajectory f;
    try {
      r = integrate_reduced(spec, grid);
      f = integrate_full(spec, grid);
    } catch (const DomainEscape&) {
      continue;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& rs = r.samples[i];
      const auto& fs = f.samples[i];
      CHECK(std::abs(first_integral(spec, rs) - r.A) < 1e-9 * (1 + std::abs(r.A)));
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(std::abs(std::norm(fs.ws[j]) - lam[j] * rs.u - alphas[j]) < 1e-8);
        CHECK(std::abs(fs.args[j] - rs.phis[j]) < 1e-7);
      }
      CHECK(std::abs(fs.theta - rs.theta) < 1e-7);
    }
  }
}

TEST_CASE("trajectory csv") {
  auto spec = make({1, -1}, 0, {1, 1}, {pi / 4, pi / 4}, 0.0);
  auto tr = integrate_reduced(spec, 1.0, 1e-10, 3);
  std::ostringstream os;
  write_trajectory_csv(os, spec, tr);
  const auto text = os.str();
  CHECK(text.rfind("s,u,phi_1,phi_2,theta,first_integral_residual\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
