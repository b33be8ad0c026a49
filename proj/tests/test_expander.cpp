#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lagsol/errors.hpp"
#include "lagsol/expander.hpp"
#include "lagsol/reduced_ode.hpp"

using namespace lagsol;
using std::numbers::pi;

TEST_CASE("eval_P") {
  const std::vector<double> a{1.0, 1.0};
  CHECK(eval_P(0.0, a, 1.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eval_P(0.0, a, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eval_P(0.0, a, 1e-9) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eval_P(0.5, a, 0.0) == doctest::Approx(2.5).epsilon(1e-14));
  // direct formula away from cancellation
  const double t = 1.7;
  CHECK(eval_P(0.3, a, t) ==
        doctest::Approx(((1 + t * t) * (1 + t * t) * std::exp(0.3 * t * t) - 1) / (t * t)).epsilon(1e-13));
  // e^{alpha t^2} prod a t^{2n-2} dominates
  const double big = 20.0;
  const double lead = 2.0 * std::log1p(big * big) + big * big - 2.0 * std::log(big);
  CHECK(log_P(1.0, a, big) == doctest::Approx(lead).epsilon(1e-14));
  CHECK(std::isfinite(log_P(1.0, a, 1e3)));
}

TEST_CASE("profile_eval on the symmetric special Lagrangian") {
  ExpanderProfile prof{0.0, {1.0, 1.0}, {0.0, 0.0}, 0.0};
  auto v0 = profile_eval(prof, 0.0);
  CHECK(v0.r[0] == doctest::Approx(1.0));
  CHECK(v0.phi[0] == 0.0);
  CHECK(v0.theta == doctest::Approx(pi / 2).epsilon(1e-15));
  std::vector<double> ys{-30.0, -2.0, -0.1, 0.3, 1.0, 5.0, 100.0};
  auto vals = profile_eval(prof, ys);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    // closed form arctan(y / sqrt(2 + y^2))
    CHECK(std::abs(vals[i].phi[0] - std::atan(y / std::sqrt(2 + y * y))) < 1e-12);
    CHECK(std::abs(vals[i].theta - pi / 2) < 1e-11);
  }
}

TEST_CASE("profile agrees with the reduced ODE") {
  ExpanderProfile prof{0.8, {0.7, 1.6}, {0.2, -0.1}, 0.0};
  TrajectorySpec spec;
  spec.params = {{1.0, 1.0}, 1.0, prof.alpha};
  spec.alphas = {1 / prof.a[0], 1 / prof.a[1]};
  spec.phi0 = prof.psi;
  spec.theta0 = prof.psi[0] + prof.psi[1] + pi / 2;
  const auto grid = linspace(-1.5, 1.5, 13);
  IntegrationOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  auto tr = integrate_reduced(spec, grid, opt);
  for (const auto& st : tr.samples) {
    const double y = std::copysign(std::sqrt(std::max(st.u, 0.0)), st.s);
    auto v = profile_eval(prof, y);
    CHECK(std::abs(v.phi[0] - st.phis[0]) < 1e-8);
    CHECK(std::abs(v.phi[1] - st.phis[1]) < 1e-8);
    CHECK(std::abs(v.theta - st.theta) < 1e-8);
  }
}

TEST_CASE("asymptotic angles") {
  auto sym = asymptotic_angles({0.0, {1.0, 1.0}, {0.0, 0.0}, 0.0});
  CHECK(std::abs(sym.phibar[0] - pi / 4) < 1e-10);
  CHECK(std::abs(sym.phibar[1] - pi / 4) < 1e-10);
  auto one = asymptotic_angles({0.0, {3.7}, {0.0}, 0.0});
  CHECK(std::abs(one.phibar[0] - pi / 2) < 1e-10);
  auto ex = asymptotic_angles({1.0, {1.0, 1.0}, {0.0, 0.0}, 0.0});
  CHECK(std::abs(ex.phibar[0] - ex.phibar[1]) < 1e-12);
  CHECK(ex.sum() < pi / 2);
  auto rep = plane_report({1.0, {1.0, 1.0}, {0.5, 0.0}, 0.0});
  CHECK(rep.L1[0] == doctest::Approx(0.5 + ex.phibar[0]));
  CHECK(rep.L2[0] == doctest::Approx(0.5 - ex.phibar[0]));
}

TEST_CASE("angle_map agrees with asymptotic_angles and scales") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> la(-2.0, 2.0);
  for (int k = 0; k < 6; ++k) {
    const std::size_t n = 1 + k % 4;
    std::vector<double> a(n);
    for (auto& x : a) x = std::exp(la(rng));
    const double alpha = k % 2 ? 0.0 : 1.0;
    auto m = angle_map(alpha, a);
    auto p = asymptotic_angles({alpha, a, std::vector<double>(n, 0.0), 0.0});
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(m.phibar[j] - p.phibar[j]) < 1e-10);
    if (alpha == 0.0) {
      CHECK(std::abs(m.sum() - pi / 2) < 1e-10);
      std::vector<double> ta(a);
      for (auto& x : ta) x *= 37.0;
      auto mt = angle_map(0.0, ta);
      for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(mt.phibar[j] - m.phibar[j]) < 1e-10);
    }
  }
  // sum of limits along ta is pi/2 for alpha > 0
  std::vector<double> a{0.3, 2.0, 1.1};
  double prev = 0.0;
  for (double t : {1.0, 1e2, 1e4, 1e6}) {
    std::vector<double> ta(a);
    for (auto& x : ta) x *= t;
    const double s = angle_map(1.0, ta).sum();
    CHECK(s > prev);
    prev = s;
  }
  CHECK(pi / 2 - prev < 1e-4);
}

TEST_CASE("Jacobian: signs, Euler relation, finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> la(-1.5, 1.5);
  for (int k = 0; k < 4; ++k) {
    const std::size_t n = 2 + k % 2;
    std::vector<double> a(n);
    for (auto& x : a) x = std::exp(la(rng));
    for (double alpha : {0.0, 1.0}) {
      auto J = angle_map_jacobian(alpha, a);
      auto L = angle_map_log_jacobian(alpha, a);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k2 = 0; k2 < n; ++k2) {
          if (j == k2) CHECK(J(j, k2) > 0.0);
          else CHECK(J(j, k2) < 0.0);
          const double h = 1e-5 * a[k2];
          auto ap = a, am = a;
          ap[k2] += h;
          am[k2] -= h;
          const double fd = (angle_map(alpha, ap).phibar[j] - angle_map(alpha, am).phibar[j]) / (2 * h);
          CHECK(std::abs(fd - J(j, k2)) < 1e-6 * (1 + std::abs(J(j, k2))));
        }
        const double euler = L.row(j).sum();
        if (alpha > 0) CHECK(euler > 0.0);
        else CHECK(std::abs(euler) < 1e-10);
      }
    }
  }
}

TEST_CASE("invert_angle_map") {
  SUBCASE("round trip") {
    const std::vector<double> a{1.0, 1.0};
    auto target = angle_map(1.0, a);
    auto res = invert_angle_map(1.0, target);
    CHECK(std::abs(res.a[0] - 1.0) < 1e-8);
    CHECK(std::abs(res.a[1] - 1.0) < 1e-8);
    CHECK(res.residual < 1e-10);
  }
  SUBCASE("asymmetric round trip, n = 3") {
    const std::vector<double> a{0.2, 3.0, 1.4};
    auto res = invert_angle_map(1.0, angle_map(1.0, a));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(res.a[j] / a[j] - 1.0) < 1e-8);
  }
  SUBCASE("symmetric target") {
    auto res = invert_angle_map(0.5, {{0.3, 0.3, 0.3}});
    CHECK(std::abs(res.a[0] - res.a[1]) < 1e-9 * res.a[0]);
    CHECK(std::abs(res.a[0] - res.a[2]) < 1e-9 * res.a[0]);
    CHECK(res.residual < 1e-10);
  }
  SUBCASE("special Lagrangian normalization") {
    auto res = invert_angle_map(0.0, {{pi / 4, pi / 4}});
    CHECK(res.a[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.a[1] == doctest::Approx(0.5).epsilon(1e-9));
    auto res2 = invert_angle_map(0.0, {{0.4, pi / 2 - 0.4}});
    CHECK(res2.a[0] + res2.a[1] == doctest::Approx(1.0));
    CHECK(res2.residual < 1e-10);
  }
  SUBCASE("extreme targets") {
    auto res = invert_angle_map(1.0, {{0.05, 1.3}});
    CHECK(res.residual < 1e-10);
  }
  SUBCASE("near the special Lagrangian boundary") {
    auto res = invert_angle_map(1.0, {{0.6, pi / 2 - 0.6 - 1e-12}});
    CHECK(res.residual < 1e-10);
    CHECK(res.a[0] + res.a[1] > 1e6);
    MESSAGE("near-boundary a = ", res.a[0], ", ", res.a[1], " residual ", res.residual);
  }
  SUBCASE("invalid targets") {
    CHECK_THROWS_AS(invert_angle_map(1.0, {{0.8, 0.8}}), InvalidTarget);
    CHECK_THROWS_AS(invert_angle_map(1.0, {{-0.1, 0.3}}), InvalidTarget);
    CHECK_THROWS_AS(invert_angle_map(0.0, {{0.3, 0.3}}), InvalidTarget);
    CHECK_THROWS_AS(invert_angle_map(-1.0, {{0.3, 0.3}}), InvalidTarget);
  }
}

TEST_CASE("profile csv and curve") {
  ExpanderProfile prof{1.0, {1.0, 2.0}, {0.0, 0.0}, 0.0};
  std::vector<double> ys{-1.0, 0.0, 2.0};
  std::ostringstream os;
  write_profile_csv(os, profile_eval(prof, ys));
  CHECK(os.str().rfind("y,r_1,r_2,phi_1,phi_2,theta\n", 0) == 0);
  ExpanderCurve curve(prof);
  auto pt = curve.point(0.0);
  CHECK(std::abs(pt.w[0] - 1.0) < 1e-15);
  CHECK(pt.theta == doctest::Approx(pi / 2));
}
