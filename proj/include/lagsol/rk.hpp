#pragma once

// Embedded Dormand-Prince 5(4) with PI step-size control.  The right-hand
// side may throw DomainProbe when a trial stage leaves the admissible set;
// the step is then retried with a smaller size.  An optional acceptance
// predicate can veto steps that pass the embedded error test (used for
// first-integral monitoring).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "lagsol/errors.hpp"

namespace lagsol::rk {

using Vec = Eigen::VectorXd;

struct DomainProbe {};

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  int max_steps = 5'000'000;
  // |y| beyond this is treated as leaving the domain (finite-time blow-up).
  double blowup = 1e12;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded error weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace detail

// Integrates y' = rhs(s, y) from (s0, y0) through every point of `grid`
// (monotone, all on one side of s0).  observer(s, y, is_grid_point) is
// called after every accepted step; steps are clipped to land on grid
// points exactly.  accept(s, y) may return false to reject a step.
template <class Rhs, class Accept, class Observer>
Stats integrate(Rhs&& rhs, double s0, Vec y0, std::span<const double> grid,
                const Options& opt, Accept&& accept, Observer&& observer) {
  using namespace detail;
  Stats stats;
  if (grid.empty()) return stats;
  const double dir = (grid.back() >= s0) ? 1.0 : -1.0;
  const Eigen::Index dim = y0.size();

  Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Vec ytmp(dim), ynew(dim), err(dim);

  auto eval = [&](double s, const Vec& y, Vec& out) {
    ++stats.evaluations;
    rhs(s, y, out);
  };

  double s = s0;
  Vec y = std::move(y0);
  eval(s, y, k1);

  double h = opt.initial_step;
  if (h <= 0.0) {
    const double d0 = (y.array().abs() / (opt.atol + opt.rtol * y.array().abs())).matrix().norm();
    const double d1 = (k1.array().abs() / (opt.atol + opt.rtol * y.array().abs())).matrix().norm();
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 0.1);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  double err_prev = 1e-4;
  std::size_t next = 0;
  // Skip grid points equal to the start.
  while (next < grid.size() && grid[next] == s) {
    observer(s, y, true);
    ++next;
  }

  int steps = 0;
  bool last_failed = false;
  while (next < grid.size()) {
    if (++steps > opt.max_steps) throw ToleranceFailure("step budget exhausted at s=" + std::to_string(s));
    const double target = grid[next];
    double step = dir * h;
    bool hits = false;
    if (dir * (s + step - target) >= 0.0) {
      step = target - s;
      hits = true;
    }
    const double h_floor = 1e-14 * std::max(1.0, std::abs(s));
    if (std::abs(step) < h_floor && !hits) {
      if (y.cwiseAbs().maxCoeff() > 1e-3 * opt.blowup) {
        throw DomainEscape(s, "solution blows up near s=" + std::to_string(s));
      }
      throw ToleranceFailure("step size underflow at s=" + std::to_string(s));
    }

    bool probe_failed = false;
    try {
      ytmp = y + step * a21 * k1;
      eval(s + c2 * step, ytmp, k2);
      ytmp = y + step * (a31 * k1 + a32 * k2);
      eval(s + c3 * step, ytmp, k3);
      ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(s + c4 * step, ytmp, k4);
      ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(s + c5 * step, ytmp, k5);
      ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(s + step, ytmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      eval(s + step, ynew, k7);
    } catch (const DomainProbe&) {
      probe_failed = true;
    }

    if (probe_failed) {
      ++stats.rejected;
      h = std::abs(step) * 0.25;
      last_failed = true;
      continue;
    }

    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      en += (err[i] / sc) * (err[i] / sc);
    }
    en = std::sqrt(en / static_cast<double>(dim));

    bool ok = en <= 1.0 && std::isfinite(en);
    if (ok && !accept(s + step, ynew)) {
      // Invariant drift: shrink regardless of the embedded estimate.
      ++stats.rejected;
      h = std::abs(step) * 0.5;
      last_failed = true;
      continue;
    }

    if (ok) {
      ++stats.accepted;
      s = hits ? target : s + step;
      y = ynew;
      k1 = k7;
      if (y.cwiseAbs().maxCoeff() > opt.blowup) {
        throw DomainEscape(s, "solution left every bounded set near s=" + std::to_string(s));
      }
      observer(s, y, hits);
      if (hits) ++next;
      // PI controller.
      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, last_failed ? 1.0 : 5.0);
      err_prev = std::max(en, 1e-4);
      // Keep the pre-clip step size when the step was shortened to hit a grid point.
      h = std::max(std::abs(step), hits ? h : 0.0) * fac;
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
      last_failed = false;
    } else {
      ++stats.rejected;
      double fac = 0.9 * std::pow(std::isfinite(en) ? en : 1e10, -0.2);
      h = std::abs(step) * std::clamp(fac, 0.1, 0.9);
      last_failed = true;
    }
  }
  return stats;
}

}  // namespace lagsol::rk
