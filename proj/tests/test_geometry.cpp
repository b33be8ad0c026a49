#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lagsol/errors.hpp"
#include "lagsol/expander.hpp"
#include "lagsol/geometry.hpp"
#include "lagsol/reduced_ode.hpp"

using namespace lagsol;
using std::numbers::pi;

namespace {
std::vector<std::pair<std::vector<double>, double>> samples_for(const std::vector<double>& lam, double C,
                                                                std::size_t count, double pmin, double pmax,
                                                                std::uint64_t seed) {
  auto xs = sample_quadric(lam, C, count, 1.2, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> up(pmin, pmax);
  std::vector<std::pair<std::vector<double>, double>> out;
  for (auto& x : xs) out.emplace_back(std::move(x), up(rng));
  return out;
}
}  // namespace

TEST_CASE("immerse") {
  ExpanderCurve curve({0.0, {1.0, 1.0}, {0.0, 0.0}, 0.0});
  auto pt = immerse(curve, {1.0, 0.0}, 0.0);
  CHECK(std::abs(pt.z[0] - 1.0) < 1e-15);
  CHECK(std::abs(pt.z[1]) < 1e-15);
  TrajectorySpec spec{{{1.0, -1.0}, 1.0, 0.0}, {1.0, 1.0}, {pi / 4, pi / 4}, 0.0, 0.0};
  OdeCurve torus(spec, -1.0, 1.0);
  auto q = immerse(torus, {std::sqrt(2.0), 1.0}, 0.0);
  CHECK(std::abs(q.z[0] - std::polar(std::sqrt(2.0), pi / 4)) < 1e-14);
  CHECK(std::abs(q.z[1] - std::polar(1.0, pi / 4)) < 1e-14);
}

TEST_CASE("quadric basis is oriented and orthonormal") {
  std::vector<double> lam{1, 1, -1};
  for (const auto& x : sample_quadric(lam, 1.0, 20, 2.0, 3)) {
    double q = 0;
    for (int j = 0; j < 3; ++j) q += lam[j] * x[j] * x[j];
    CHECK(std::abs(q - 1.0) < 1e-12 * (1 + x[0] * x[0]));
    auto E = quadric_basis(lam, x);
    CHECK((E.transpose() * E - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-13);
    CHECK(E.determinant() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(quadric_basis(lam, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(sample_quadric({-1.0, -1.0}, 1.0, 3, 1.0, 1), ValidationError);
  auto neg = sample_quadric({1.0, -1.0}, -2.0, 5, 1.0, 9);
  for (auto& x : neg) CHECK(std::abs(x[0] * x[0] - x[1] * x[1] + 2.0) < 1e-12 * (1 + x[1] * x[1]));
}

TEST_CASE("expander frames, angle, F-perp and H") {
  ExpanderCurve curve({1.0, {1.0, 2.0}, {0.3, -0.2}, 0.0});
  auto samples = samples_for({1.0, 1.0}, 1.0, 40, -3.0, 3.0, 17);
  for (const auto& [x, y] : samples) {
    const auto cp = curve.point(y);
    const auto fr = frame_at(cp, curve, x);
    CHECK(lagrangian_residual(fr) < 1e-12);
    CHECK(lagrangian_angle_residual(fr) < 1e-10);
    CHECK(std::abs(fr.g(0, 1)) < 1e-12 * fr.g(1, 1));
    double rr = 1.0, ssum = 0.0;
    for (int l = 0; l < 2; ++l) {
      const double r2 = std::norm(cp.w[l]);
      rr *= r2;
      ssum += x[l] * x[l] / r2;
    }
    CHECK(fr.g(1, 1) == doctest::Approx(rr * ssum).epsilon(1e-10));
    auto F = normal_projection_F(curve, x, y);
    CHECK(F.tangential_check < 1e-12);
    CHECK(norm(axpy(-1.0, *F.closed_form, F.projected)) < 1e-10 * norm(F.projected));
    // H from the closed form equals alpha F-perp / C
    const auto H = mean_curvature_formula(fr, cp, curve);
    CHECK(norm(axpy(-1.0, F.projected, H)) < 1e-10 * norm(H));
  }
  auto rep = residual_report(curve, std::vector(samples.begin(), samples.begin() + 10));
  CHECK(rep.max_soliton < 1e-3);
  MESSAGE("expander soliton residual ", rep.max_soliton);
}

TEST_CASE("turning point magnitude and special Lagrangian") {
  ExpanderCurve curve({1.0, {1.0, 1.0}, {0.0, 0.0}, 0.0});
  const std::vector<double> x{0.6, 0.8};
  auto F = normal_projection_F(curve, x, 0.0);
  auto fr = frame_at(curve, x, 0.0);
  // |sin(phi - theta)| = 1 at y = 0, r_j = 1
  CHECK(norm(F.projected) == doctest::Approx(1.0 / std::sqrt(fr.g(1, 1))).epsilon(1e-12));

  ExpanderCurve slag({0.0, {1.0, 3.0}, {0.0, 0.0}, 0.0});
  for (const auto& [xx, y] : samples_for({1.0, 1.0}, 1.0, 8, -2.0, 2.0, 2)) {
    CHECK(norm(mean_curvature_fd(slag, xx, y)) < 1e-4);
  }
}

TEST_CASE("ODE-backed curve: torus and case (ii) orbit") {
  TrajectorySpec spec{{{1.0, -1.0}, 1.0, 0.0}, {1.0, 1.0}, {pi / 4, pi / 4}, 0.0, 0.0};
  OdeCurve torus(spec, -5.0, 5.0);
  auto samples = samples_for({1.0, -1.0}, 1.0, 20, -5.0, 5.0, 4);
  auto rep = residual_report(torus, samples);
  CHECK(rep.max_lagrangian < 1e-12);
  CHECK(rep.max_angle < 1e-10);
  CHECK(rep.max_soliton < 1e-4);

  TrajectorySpec ii{{{1.0, 1.0}, 1.0, -1.0}, {1.0, 1.5}, {0.4, 0.3}, 0.0, 0.0};
  OdeCurve orbit(ii, -4.0, 4.0);
  auto rep2 = residual_report(orbit, samples_for({1.0, 1.0}, 1.0, 20, -4.0, 4.0, 8));
  CHECK(rep2.max_lagrangian < 1e-12);
  CHECK(rep2.max_angle < 1e-10);
  CHECK(rep2.max_soliton < 1e-3);
  MESSAGE("shrinker soliton residual ", rep2.max_soliton);
  std::ostringstream os;
  write_residual_csv(os, rep2);
  CHECK(os.str().rfind("point_id,s_or_y,lagrangian_residual,angle_residual,soliton_residual\n", 0) == 0);
}
