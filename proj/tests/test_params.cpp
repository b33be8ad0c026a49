#include <cmath>

#include "doctest.h"
#include "lagsol/errors.hpp"
#include "lagsol/params.hpp"
#include "lagsol/reduced_ode.hpp"

using namespace lagsol;

TEST_CASE("normalize maps constants to unit signs") {
  auto [p, rec] = normalize({{2.0, -3.0}, 4.0, 1.0});
  CHECK(p.lambdas == std::vector<double>{1.0, -1.0});
  CHECK(p.C == 1.0);
  CHECK(p.alpha == doctest::Approx(0.25));
  CHECK(p.is_normalized());
  // s~ = C |C|^{-n/2} prod |lambda|^{1/2} s
  CHECK(rec.s_factor == doctest::Approx(4.0 / 4.0 * std::sqrt(6.0)));
  CHECK(rec.u_factor == doctest::Approx(4.0));
  CHECK(rec.x_factors[0] == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(rec.w_factors[1] == doctest::Approx(2.0 / std::sqrt(3.0)));
}

TEST_CASE("normalize leaves the normal form alone") {
  auto [p, rec] = normalize({{1.0, 1.0, 1.0}, 1.0, 0.0});
  CHECK(p.lambdas == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(p.alpha == 0.0);
  CHECK(rec.approx_equal(ScalingRecord::identity(3), 1e-15));
}

TEST_CASE("normalize with negative C") {
  auto [p, rec] = normalize({{-5.0}, -2.0, 2.0});
  CHECK(p.lambdas == std::vector<double>{1.0});
  CHECK(p.alpha == doctest::Approx(-1.0));
}

TEST_CASE("normalize sorts positives first and is idempotent") {
  auto [p, rec] = normalize({{-1.0, 2.0, -0.5, 3.0}, 1.0, 0.3});
  CHECK(p.lambdas == std::vector<double>{1.0, 1.0, -1.0, -1.0});
  CHECK(rec.perm == std::vector<std::size_t>{1, 3, 0, 2});
  CHECK(p.m() == 2);
  auto [q, rec2] = normalize(p);
  CHECK(q.lambdas == p.lambdas);
  CHECK(q.alpha == p.alpha);
  CHECK(rec2.approx_equal(ScalingRecord::identity(4), 1e-15));
}

TEST_CASE("normalize rejects zero constants") {
  CHECK_THROWS_AS(normalize({{1.0, 0.0}, 1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(normalize({{1.0, 1.0}, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(normalize({{}, 1.0, 0.0}), ValidationError);
}

TEST_CASE("rescale_solution") {
  const auto id = ScalingRecord::identity(2);
  CHECK(rescale_solution(id, 1.0).approx_equal(id, 1e-15));
  const auto r = rescale_solution(id, 2.0);
  CHECK(1.0 * r.alpha_factor == doctest::Approx(0.25));
  CHECK(0.5 * r.A_factor == doctest::Approx(2.0));
  CHECK(r.s_factor == doctest::Approx(1.0));
  CHECK(rescale_solution(r, 0.5).approx_equal(id, 1e-14));
  CHECK_THROWS_AS(rescale_solution(id, 0.0), ValidationError);
  CHECK_THROWS_AS(rescale_solution(id, -1.0), ValidationError);
  auto [p, rec] = normalize({{2.0, -3.0, 0.7}, -1.5, 0.4});
  CHECK(rec.compose_after(rec.inverse()).approx_equal(ScalingRecord::identity(3), 1e-14));
  CHECK(rec.inverse().compose_after(rec).approx_equal(ScalingRecord::identity(3), 1e-14));
}

// Maps a solution of the original constants to the normalized ones and checks
// that the image solves the normalized system (and maps back exactly).
TEST_CASE("normalization round trip on a full trajectory") {
  const SolitonParams orig{{2.0, -0.5}, 1.5, 0.6};
  auto [p, rec] = normalize(orig);
  const std::size_t n = 2;

  // Full system with general constants, integrated directly.
  TrajectorySpec raw{orig, {0.8, 1.3}, {0.2, -0.4}, 0.1, 0.0};
  const double S = 1.5;
  const auto grid = linspace(0.0, S, 7);
  IntegrationOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  const auto full = integrate_full(raw, grid, opt);

  // Same curve in normalized variables.
  TrajectorySpec norm;
  norm.params = p;
  norm.alphas.resize(n);
  norm.phi0.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto w = full.samples[0].ws[rec.perm[j]] * rec.w_factors[j];
    norm.alphas[j] = std::norm(w);
    norm.phi0[j] = std::arg(w);
  }
  norm.theta0 = full.samples[0].theta;
  std::vector<double> sgrid;
  for (double s : grid) sgrid.push_back(rec.s_factor * s);
  const auto img = integrate_full(norm, sgrid, opt);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto mapped = full.samples[i].ws[rec.perm[j]] * rec.w_factors[j];
      CHECK(std::abs(mapped - img.samples[i].ws[j]) < 1e-10 * std::abs(mapped));
      const auto back = img.samples[i].ws[j] / rec.w_factors[j];
      CHECK(std::abs(back - full.samples[i].ws[rec.perm[j]]) <=
            1e-12 * std::abs(back) + std::abs(mapped - img.samples[i].ws[j]) / rec.w_factors[j]);
    }
    CHECK(std::abs(full.samples[i].theta - img.samples[i].theta) < 1e-10);
  }
}
