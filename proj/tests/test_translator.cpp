#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "lagsol/errors.hpp"
#include "lagsol/geometry.hpp"
#include "lagsol/reduced_ode.hpp"
#include "lagsol/translator.hpp"

using namespace lagsol;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

// P(t) straight from the product, no logs
double P_direct(double alpha, const std::vector<double>& a, double t) {
  double prod = std::exp(alpha * t * t);
  for (double ak : a) prod *= 1.0 + ak * t * t;
  return (prod - 1.0) / (t * t);
}

PeriodicSpec periodic_base(std::vector<double> lambdas, double alpha, std::vector<double> alphas, double frac) {
  SolitonParams p;
  p.lambdas = std::move(lambdas);
  p.alpha = alpha;
  auto spec = make_periodic_spec(p, std::move(alphas), 1.0);
  spec.A = frac * std::exp(0.5 * spec.log_G0());
  return spec;
}

std::vector<std::pair<std::vector<double>, double>> samples(std::size_t k, std::vector<double> ps,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xd(-1.0, 1.0);
  std::vector<std::pair<std::vector<double>, double>> out;
  for (double p : ps) {
    std::vector<double> x(k);
    for (auto& v : x) v = xd(rng);
    out.emplace_back(x, p);
  }
  return out;
}

// fourth-order central difference of Im/Re beta
cd fd_beta(const TranslatorCurve& c, double p, double h) {
  const std::vector<double> ps{p - 2 * h, p - h, p + h, p + 2 * h};
  const auto cps = c.points(ps);
  return (cps[0].beta - 8.0 * cps[1].beta + 8.0 * cps[2].beta - cps[3].beta) / (12.0 * h);
}

}  // namespace

TEST_CASE("normal form at y = 0") {
  for (double alpha : {0.25, 1.0, 3.0}) {
    for (const std::vector<double>& a : {std::vector<double>{1.0}, {0.5, 2.0}, {1.0, 1.5, 0.3}}) {
      const auto prof = corollary_I_profile(alpha, a);
      CHECK(prof.n() == a.size() + 1);
      const cd b = beta_eval(prof, 0.0);
      CHECK(std::abs(b - cd(0.0, -pi / (2 * alpha))) < 1e-10);
    }
  }
}

TEST_CASE("closed-form beta has the derivative of the system") {
  for (double alpha : {0.5, 2.0}) {
    const std::vector<double> a{0.7, 1.6};
    const auto prof = corollary_I_profile(alpha, a);
    TranslatorCurve c(prof);
    double pa = 1.0;
    for (double ak : a) pa *= ak;
    for (double y : {-2.0, -0.6, 0.3, 1.1, 2.5}) {
      const auto base = c.base().point(y);
      cd prod = 1.0;
      for (const auto& w : base.w) prod *= w;
      const double ds_dy = std::sqrt(pa) * std::exp(0.5 * alpha * y * y) / std::sqrt(P_direct(alpha, a, y));
      const cd want = std::polar(1.0, base.theta) * std::conj(prod) * ds_dy;
      const cd got = fd_beta(c, y, 1e-3);
      CHECK(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
  // periodic base, s-parametrized
  const auto spec = periodic_base({1.0, 1.0}, -1.0, {1.0, 1.3}, 0.6);
  TranslatorCurve c(periodic_translator(spec), -10.0, 10.0);
  for (double s : {-3.0, 0.4, 2.2, 7.0}) {
    const auto base = c.base().point(s);
    cd prod = 1.0;
    for (const auto& w : base.w) prod *= w;
    const cd want = std::polar(1.0, base.theta) * std::conj(prod);
    CHECK(std::abs(fd_beta(c, s, 1e-3) - want) < 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("Im beta is monotone") {
  std::vector<double> ss;
  for (int i = 0; i <= 80; ++i) ss.push_back(-20.0 + 0.5 * i);
  // A > 0 on periodic bases: strictly decreasing, rate -A e^{-alpha u/2}
  for (const auto& spec : {periodic_base({1.0, 1.0}, -1.0, {1.0, 1.3}, 0.6),
                           periodic_base({1.0, -1.0}, 0.5, {1.0, 2.0}, 0.3),
                           periodic_base({1.0, -1.0}, 0.0, {1.0, 2.0}, 0.8)}) {
    TranslatorCurve c(periodic_translator(spec), -20.0, 20.0);
    CHECK(c.profile().A > 0);
    const auto cps = c.points(ss);
    for (std::size_t i = 1; i < cps.size(); ++i) CHECK(cps[i].beta.imag() < cps[i - 1].beta.imag());
    const auto f = translator_flags(c, ss);
    CHECK(f.injective);
    CHECK(f.sampled_monotone);
    CHECK(f.im_beta_slope_sign == -1.0);
  }
  // explicit family has A < 0: increasing in y
  TranslatorCurve c(corollary_I_profile(1.0, {1.0, 2.0}));
  const auto ys = linspace(-6.0, 6.0, 49);
  const auto f = translator_flags(c, ys);
  CHECK(c.profile().A < 0);
  CHECK(f.sampled_monotone);
  CHECK_FALSE(f.infinite_oscillation);
}

TEST_CASE("alpha = 0 branch") {
  // n = 2: P = a, Im beta = y / sqrt(a)
  {
    const auto prof = corollary_I_profile(0.0, {2.0});
    for (double y : {-3.0, 0.5, 10.0}) {
      const cd b = beta_eval(prof, y);
      CHECK(std::abs(b.real() - 0.5 * y * y) < 1e-12);
      CHECK(std::abs(b.imag() - y / std::sqrt(2.0)) < 1e-10);
    }
  }
  // a = (1, 1): P = 2 + t^2, Im beta = asinh(y / sqrt 2)
  {
    const auto prof = corollary_I_profile(0.0, {1.0, 1.0});
    for (double y : {-4.0, 0.2, 3.0, 50.0}) CHECK(std::abs(beta_eval(prof, y).imag() - std::asinh(y / std::sqrt(2.0))) < 1e-10);
    // derivative against the system, with theta constant
    TranslatorCurve c(prof);
    for (double y : {-1.0, 0.7, 2.0}) {
      const auto cp = c.point(y);
      CHECK(std::abs(fd_beta(c, y, 1e-3) - cp.dbeta) < 1e-9);
    }
  }
}

TEST_CASE("asymptotic angles and oscillation") {
  for (double alpha : {0.2, 1.0, 4.0}) {
    const auto r = angle_range(corollary_I_profile(alpha, {0.8, 1.7, 0.4}));
    CHECK(r.phibar_sum < pi / 2);
    CHECK(r.oscillation == doctest::Approx(pi - 2 * r.phibar_sum).epsilon(1e-14));
  }
  {
    const auto r = angle_range(corollary_I_profile(0.0, {0.3, 0.7}));
    CHECK(std::abs(r.phibar_sum - pi / 2) < 1e-9);
    CHECK(std::abs(r.oscillation) < 2e-9);
  }
  {
    const auto r = angle_range(corollary_I_profile(0.0, {1.0}));
    CHECK(std::abs(r.phibar_sum - pi / 2) < 1e-9);
  }
  // sampled theta stays inside [lo, hi] and fills it out
  const auto prof = corollary_I_profile(1.0, {1.0, 2.0});
  const auto r = angle_range(prof);
  TranslatorCurve c(prof);
  const auto cps = c.points(linspace(-60.0, 60.0, 241));
  double lo = 1e300, hi = -1e300;
  for (const auto& cp : cps) {
    lo = std::min(lo, cp.theta);
    hi = std::max(hi, cp.theta);
  }
  CHECK(lo >= r.lo - 1e-10);
  CHECK(hi <= r.hi + 1e-10);
  CHECK(hi - lo == doctest::Approx(r.oscillation).epsilon(1e-4));
  // towards the Lawlor boundary the oscillation closes up
  double prev = pi;
  for (double eps : {0.2, 0.05, 0.01}) {
    AngleVector target{{0.5 * (pi / 2 - eps), 0.5 * (pi / 2 - eps)}};
    const auto inv = invert_angle_map(1.0, target);
    const auto rr = angle_range(corollary_I_profile(1.0, inv.a));
    CHECK(rr.oscillation == doctest::Approx(2 * eps).epsilon(1e-6));
    CHECK(rr.oscillation < prev);
    prev = rr.oscillation;
  }
}

TEST_CASE("translating soliton equation") {
  auto prof = corollary_I_profile(1.0, {1.0, 2.0});
  prof.K = cd(0.3, -0.7);
  TranslatorCurve c(prof);
  const auto rep = translator_soliton_residual(c, samples(2, {-2.0, -0.8, 0.0, 0.5, 1.3, 2.4}, 7));
  CHECK(rep.residuals.max_soliton < 1e-3);
  CHECK(rep.residuals.max_lagrangian < 1e-10);
  CHECK(rep.residuals.max_angle < 1e-10);
  CHECK(rep.c_expected == doctest::Approx(-0.7));
  CHECK(rep.c_error < 1e-8);

  for (const auto& spec : {periodic_base({1.0, 1.0}, -1.0, {1.0, 1.3}, 0.6),
                           periodic_base({1.0, -1.0}, 0.5, {1.0, 2.0}, 0.3)}) {
    TranslatorCurve pc(periodic_translator(spec, {0.2, -0.4}, cd(0.0, 1.5)), -8.0, 8.0);
    const auto pr = translator_soliton_residual(pc, samples(2, {-6.0, -1.0, 0.0, 2.5, 7.5}, 11));
    CHECK(pr.residuals.max_soliton < 1e-3);
    CHECK(pr.c_error < 1e-8);
  }
  // case (i) base
  TranslatorCurve hc(periodic_translator(periodic_base({1.0, 1.0, 1.0}, -2.0, {1.0, 1.0, 2.0}, 1.0)));
  const auto hr = translator_soliton_residual(hc, samples(3, {-1.0, 0.5, 3.0}, 3));
  CHECK(hr.residuals.max_soliton < 1e-3);
  CHECK(hr.c_error < 1e-8);

  auto zero = corollary_I_profile(0.0, {1.0, 1.0});
  CHECK_THROWS_AS(translator_soliton_residual(TranslatorCurve(zero), samples(2, {0.5}, 1)), ValidationError);
}

TEST_CASE("special Lagrangian branch has zero mean curvature") {
  TranslatorCurve c(corollary_I_profile(0.0, {1.0, 0.5}));
  const auto rep = residual_report(c, samples(2, {-1.5, 0.3, 2.0}, 5));
  for (const auto& row : rep.rows) CHECK(row.h_norm < 1e-5);
}

TEST_CASE("infinite angle oscillation on periodic bases") {
  const auto spec = periodic_base({1.0, -1.0}, 0.5, {1.0, 2.0}, 0.3);
  const auto orbit = compute_orbit(spec);
  TranslatorCurve c(periodic_translator(spec), 0.0, 2 * orbit.S);
  const std::vector<double> ss{0.0, orbit.S, 2 * orbit.S};
  const auto f = translator_flags(c, ss);
  CHECK(f.infinite_oscillation);
  const auto cps = c.points(ss);
  // theta(s + S) - theta(s) is the holonomy sum, beta drifts by a constant too
  CHECK(std::abs(cps[1].theta - cps[0].theta - f.theta_drift) < 1e-8);
  CHECK(std::abs(cps[2].theta - cps[1].theta - f.theta_drift) < 1e-8);
  CHECK(std::abs((cps[2].beta - cps[1].beta) - (cps[1].beta - cps[0].beta)) < 1e-8);
}

TEST_CASE("translation is a shift of K") {
  const auto prof = corollary_I_profile(1.5, {0.6, 1.1});
  for (double t : {-2.0, 0.25, 3.0}) {
    TranslatorCurve c0(prof), c1(translate(prof, t));
    for (const auto& [x, y] : samples(2, {-1.0, 0.0, 2.0}, 9)) {
      const auto z0 = immerse(c0, x, y).z;
      const auto z1 = immerse(c1, x, y).z;
      for (std::size_t l = 0; l + 1 < z0.size(); ++l) CHECK(z1[l] == z0[l]);
      CHECK(std::abs(z1.back() - (z0.back() + t * 1.5)) < 1e-13 * (1 + std::abs(z0.back())));
    }
  }
}

TEST_CASE("weak asymptotics") {
  TranslatorCurve c(corollary_I_profile(1.0, {1.0, 2.0}));
  const std::vector<double> x{0.7, -0.4};
  double prev_p = 1e300, prev_m = 1e300;
  for (double y : {4.0, 8.0, 16.0, 32.0}) {
    const double rp = asymptotic_ratio(c, x, y);
    const double rm = asymptotic_ratio(c, x, -y);
    // Im z_n stays bounded, so the ratio falls like 1/|y|
    if (y > 4.0) {
      CHECK(rp < 0.6 * prev_p);
      CHECK(rm < 0.6 * prev_m);
    }
    prev_p = rp;
    prev_m = rm;
  }
  CHECK(prev_p < 0.1);
  CHECK(prev_m < 0.1);
}

TEST_CASE("translator validation") {
  CHECK_THROWS_AS(corollary_I_profile(1.0, {1.0, -2.0}), ValidationError);
  auto prof = corollary_I_profile(1.0, {1.0});
  prof.alpha = 2.0;
  CHECK_THROWS_AS(validate(prof), ValidationError);
}
