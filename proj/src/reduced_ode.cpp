#include "lagsol/reduced_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "lagsol/errors.hpp"
#include "lagsol/io.hpp"

namespace lagsol {

namespace {

constexpr double kBoundary = 1e-12;

double min_margin(const TrajectorySpec& spec, double u) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < spec.n(); ++j) {
    m = std::min(m, spec.alphas[j] + spec.params.lambdas[j] * u);
  }
  return m;
}

double sqrtQ(const TrajectorySpec& spec, double u) {
  double q = 1.0;
  for (std::size_t j = 0; j < spec.n(); ++j) {
    q *= std::sqrt(spec.alphas[j] + spec.params.lambdas[j] * u);
  }
  return q;
}

// Splits `grid` into the parts ahead of and behind s0, each sorted in the
// direction of travel and deduplicated, remembering where each came from.
struct GridSide {
  std::vector<double> points;
  std::vector<std::vector<std::size_t>> owners;
};

std::pair<GridSide, GridSide> split_grid(std::span<const double> grid, double s0) {
  std::vector<std::size_t> idx(grid.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
  GridSide fwd, bwd;
  for (auto i : idx) {
    if (!std::isfinite(grid[i])) throw ValidationError("non-finite grid point");
    GridSide& side = grid[i] >= s0 ? fwd : bwd;
    if (!side.points.empty() && side.points.back() == grid[i]) {
      side.owners.back().push_back(i);
    } else {
      side.points.push_back(grid[i]);
      side.owners.push_back({i});
    }
  }
  std::reverse(bwd.points.begin(), bwd.points.end());
  std::reverse(bwd.owners.begin(), bwd.owners.end());
  return {std::move(fwd), std::move(bwd)};
}

rk::Options rk_options(const IntegrationOptions& opt) {
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw ValidationError("tolerances must be positive");
  rk::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.max_step = opt.max_step;
  return o;
}

}  // namespace

double TrajectorySpec::A() const {
  double q = 1.0;
  for (double a : alphas) q *= std::sqrt(a);
  const double phi = std::accumulate(phi0.begin(), phi0.end(), 0.0);
  return q * std::sin(phi - theta0);
}

void validate(const TrajectorySpec& spec) {
  validate(spec.params);
  const std::size_t n = spec.params.n();
  if (spec.alphas.size() != n || spec.phi0.size() != n) {
    throw ValidationError("alphas and phi0 must have one entry per lambda");
  }
  for (double a : spec.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("every alpha_j must be positive");
  }
  for (double p : spec.phi0) {
    if (!std::isfinite(p)) throw ValidationError("phi0 entries must be finite");
  }
  if (!std::isfinite(spec.theta0) || !std::isfinite(spec.s0) || !std::isfinite(spec.params.alpha)) {
    throw ValidationError("theta0, s0 and alpha must be finite");
  }
}

double ReducedState::phi() const noexcept { return std::accumulate(phis.begin(), phis.end(), 0.0); }

ReducedState initial_state(const TrajectorySpec& spec) {
  return ReducedState{spec.s0, 0.0, spec.phi0, spec.theta0};
}

double eval_Q(const TrajectorySpec& spec, double u) {
  double q = 1.0;
  for (std::size_t j = 0; j < spec.n(); ++j) q *= spec.alphas[j] + spec.params.lambdas[j] * u;
  return q;
}

ReducedDerivative reduced_rhs(const TrajectorySpec& spec, const ReducedState& state) {
  if (!(min_margin(spec, state.u) > 0.0)) {
    throw ValidationError("u outside the domain where every alpha_j + lambda_j u > 0");
  }
  const double rq = sqrtQ(spec, state.u);
  const double d = state.phi() - state.theta;
  const double sn = std::sin(d), cs = std::cos(d);
  ReducedDerivative out;
  out.du = 2.0 * rq * cs;
  out.dphis.resize(spec.n());
  for (std::size_t j = 0; j < spec.n(); ++j) {
    const double lam = spec.params.lambdas[j];
    out.dphis[j] = -lam * rq * sn / (spec.alphas[j] + lam * state.u);
    out.dphi += out.dphis[j];
  }
  out.dtheta = spec.params.alpha * rq * sn;
  return out;
}

double first_integral(const TrajectorySpec& spec, const ReducedState& state) {
  if (!(min_margin(spec, state.u) > 0.0)) {
    throw ValidationError("u outside the domain where every alpha_j + lambda_j u > 0");
  }
  return sqrtQ(spec, state.u) * std::exp(0.5 * spec.params.alpha * state.u) *
         std::sin(state.phi() - state.theta);
}

void full_rhs(const SolitonParams& params, std::span<const std::complex<double>> ws,
              double theta, std::span<std::complex<double>> dws, double& dtheta) {
  const std::size_t n = ws.size();
  // prefix/suffix products avoid dividing by a possibly tiny w_j
  std::vector<std::complex<double>> pre(n + 1, 1.0), suf(n + 1, 1.0);
  for (std::size_t j = 0; j < n; ++j) pre[j + 1] = pre[j] * ws[j];
  for (std::size_t j = n; j-- > 0;) suf[j] = suf[j + 1] * ws[j];
  const std::complex<double> e = std::polar(1.0, theta);
  for (std::size_t j = 0; j < n; ++j) {
    dws[j] = params.lambdas[j] * e * std::conj(pre[j] * suf[j + 1]);
  }
  dtheta = params.alpha * std::imag(std::conj(e) * pre[n]);
}

std::vector<double> linspace(double a, double b, std::size_t count) {
  if (count < 2) return {a};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = b;
  return out;
}

ReducedTrajectory integrate_reduced(const TrajectorySpec& spec, std::span<const double> grid,
                                    const IntegrationOptions& opt) {
  validate(spec);
  const std::size_t n = spec.n();
  const double A = spec.A();
  const double alpha = spec.params.alpha;
  const auto& lam = spec.params.lambdas;

  ReducedTrajectory traj;
  traj.A = A;
  traj.samples.resize(grid.size());

  auto fi = [&](const rk::Vec& y) {
    double q = 1.0;
    for (std::size_t j = 0; j < n; ++j) q *= std::sqrt(spec.alphas[j] + lam[j] * y[0]);
    const double phi = y.segment(1, static_cast<Eigen::Index>(n)).sum();
    return q * std::exp(0.5 * alpha * y[0]) * std::sin(phi - y[n + 1]);
  };
  // rounding level of fi at y
  auto fi_noise = [&](const rk::Vec& y) {
    double q = 1.0;
    for (std::size_t j = 0; j < n; ++j) q *= std::sqrt(spec.alphas[j] + lam[j] * y[0]);
    return 64.0 * std::numeric_limits<double>::epsilon() * q * std::exp(0.5 * alpha * y[0]) *
           (1.0 + y.cwiseAbs().sum());
  };

  auto rhs = [&](double, const rk::Vec& y, rk::Vec& dy) {
    const double u = y[0];
    double q = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r2 = spec.alphas[j] + lam[j] * u;
      if (!(r2 > 0.0)) throw rk::DomainProbe{};
      q *= std::sqrt(r2);
    }
    const double phi = y.segment(1, static_cast<Eigen::Index>(n)).sum();
    const double d = phi - y[n + 1];
    const double sn = std::sin(d);
    dy[0] = 2.0 * q * std::cos(d);
    for (std::size_t j = 0; j < n; ++j) dy[j + 1] = -lam[j] * q * sn / (spec.alphas[j] + lam[j] * u);
    dy[n + 1] = alpha * q * sn;
  };

  const auto [fwd, bwd] = split_grid(grid, spec.s0);
  const rk::Options ro = rk_options(opt);
  const double drift_tol = opt.invariant_factor * opt.rtol * (1.0 + std::abs(A));

  for (const GridSide* side : {&fwd, &bwd}) {
    if (side->points.empty()) continue;
    rk::Vec y0(static_cast<Eigen::Index>(n + 2));
    y0[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) y0[j + 1] = spec.phi0[j];
    y0[n + 1] = spec.theta0;

    double fi_prev = A;
    double s_prev = spec.s0;
    std::size_t next = 0;
    auto accept = [&](double s, const rk::Vec& y) {
      if (opt.invariant_factor <= 0.0) return true;
      return std::abs(fi(y) - fi_prev) <= drift_tol * std::abs(s - s_prev) + fi_noise(y);
    };
    auto observer = [&](double s, const rk::Vec& y, bool on_grid) {
      if (min_margin(spec, y[0]) < kBoundary || !y.allFinite()) {
        throw DomainEscape(s, "trajectory reached the boundary alpha_j + lambda_j u = 0 at s=" +
                                  std::to_string(s));
      }
      fi_prev = fi(y);
      s_prev = s;
      if (!on_grid) return;
      ReducedState st;
      st.s = s;
      st.u = y[0];
      st.phis.assign(y.data() + 1, y.data() + 1 + n);
      st.theta = y[n + 1];
      for (auto i : side->owners[next]) traj.samples[i] = st;
      ++next;
    };
    const auto stats = rk::integrate(rhs, spec.s0, y0, side->points, ro, accept, observer);
    traj.stats.accepted += stats.accepted;
    traj.stats.rejected += stats.rejected;
    traj.stats.evaluations += stats.evaluations;
  }
  return traj;
}

ReducedTrajectory integrate_reduced(const TrajectorySpec& spec, double s_end, double tol,
                                    std::size_t samples) {
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  const auto grid = linspace(spec.s0, s_end, std::max<std::size_t>(samples, 2));
  IntegrationOptions opt;
  opt.rtol = tol;
  opt.atol = 1e-2 * tol;
  return integrate_reduced(spec, grid, opt);
}

FullTrajectory integrate_full(const TrajectorySpec& spec, std::span<const double> grid,
                              const IntegrationOptions& opt) {
  validate(spec);
  const std::size_t n = spec.n();
  FullTrajectory traj;
  traj.samples.resize(grid.size());

  std::vector<std::complex<double>> ws(n), dws(n);
  auto rhs = [&](double, const rk::Vec& y, rk::Vec& dy) {
    for (std::size_t j = 0; j < n; ++j) ws[j] = {y[2 * j], y[2 * j + 1]};
    double dth = 0.0;
    full_rhs(spec.params, ws, y[2 * n], dws, dth);
    for (std::size_t j = 0; j < n; ++j) {
      dy[2 * j] = dws[j].real();
      dy[2 * j + 1] = dws[j].imag();
    }
    dy[2 * n] = dth;
  };

  const auto [fwd, bwd] = split_grid(grid, spec.s0);
  const rk::Options ro = rk_options(opt);
  for (const GridSide* side : {&fwd, &bwd}) {
    if (side->points.empty()) continue;
    rk::Vec y0(static_cast<Eigen::Index>(2 * n + 1));
    for (std::size_t j = 0; j < n; ++j) {
      const auto w = std::polar(std::sqrt(spec.alphas[j]), spec.phi0[j]);
      y0[2 * j] = w.real();
      y0[2 * j + 1] = w.imag();
    }
    y0[2 * n] = spec.theta0;
    std::vector<double> args = spec.phi0;
    std::size_t next = 0;
    auto observer = [&](double s, const rk::Vec& y, bool on_grid) {
      FullState st;
      st.s = s;
      st.ws.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        st.ws[j] = {y[2 * j], y[2 * j + 1]};
        if (std::norm(st.ws[j]) < kBoundary || !y.allFinite()) {
          throw DomainEscape(s, "w_" + std::to_string(j + 1) + " reached 0 at s=" + std::to_string(s));
        }
        const double a = std::arg(st.ws[j]);
        args[j] += std::remainder(a - args[j], 2.0 * std::numbers::pi);
      }
      if (!on_grid) return;
      st.theta = y[2 * n];
      st.args = args;
      for (auto i : side->owners[next]) traj.samples[i] = st;
      ++next;
    };
    auto always = [](double, const rk::Vec&) { return true; };
    const auto stats = rk::integrate(rhs, spec.s0, y0, side->points, ro, always, observer);
    traj.stats.accepted += stats.accepted;
    traj.stats.rejected += stats.rejected;
    traj.stats.evaluations += stats.evaluations;
  }
  return traj;
}

FullTrajectory integrate_full(const TrajectorySpec& spec, double s_end, double tol,
                              std::size_t samples) {
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  const auto grid = linspace(spec.s0, s_end, std::max<std::size_t>(samples, 2));
  IntegrationOptions opt;
  opt.rtol = tol;
  opt.atol = 1e-2 * tol;
  return integrate_full(spec, grid, opt);
}

void write_trajectory_csv(std::ostream& out, const TrajectorySpec& spec,
                          const ReducedTrajectory& traj) {
  std::vector<std::string> header{"s", "u"};
  for (auto& h : io::indexed("phi", spec.n())) header.push_back(h);
  header.push_back("theta");
  header.push_back("first_integral_residual");
  io::write_header(out, header);
  std::vector<double> row;
  for (const auto& st : traj.samples) {
    row.assign({st.s, st.u});
    row.insert(row.end(), st.phis.begin(), st.phis.end());
    row.push_back(st.theta);
    row.push_back(first_integral(spec, st) - traj.A);
    io::write_row(out, row);
  }
}

}  // namespace lagsol

namespace lagsol {

OdeCurve::OdeCurve(TrajectorySpec spec, double s_min, double s_max, double spacing, double rtol)
    : spec_(std::move(spec)), rtol_(rtol) {
  validate(spec_);
  if (!(spacing > 0.0) || !(s_max >= s_min)) throw ValidationError("bad checkpoint range");
  std::vector<double> grid;
  const double lo = std::min(s_min, spec_.s0), hi = std::max(s_max, spec_.s0);
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / spacing)) + 1;
  grid = linspace(lo, hi, std::max<std::size_t>(count, 2));
  grid.push_back(spec_.s0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  IntegrationOptions opt;
  opt.rtol = rtol_;
  opt.atol = 1e-2 * rtol_;
  checkpoints_ = integrate_reduced(spec_, grid, opt).samples;
}

std::vector<ReducedState> OdeCurve::states(std::span<const double> ps) const {
  std::vector<ReducedState> out(ps.size());
  std::vector<std::vector<std::size_t>> groups(checkpoints_.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto it = std::lower_bound(checkpoints_.begin(), checkpoints_.end(), ps[i],
                               [](const ReducedState& st, double v) { return st.s < v; });
    std::size_t k = static_cast<std::size_t>(it - checkpoints_.begin());
    if (k == checkpoints_.size() || (k > 0 && ps[i] - checkpoints_[k - 1].s < checkpoints_[k].s - ps[i])) --k;
    groups[k].push_back(i);
  }
  IntegrationOptions opt;
  opt.rtol = rtol_;
  opt.atol = 1e-2 * rtol_;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) continue;
    const auto& c = checkpoints_[k];
    TrajectorySpec local = spec_;
    for (std::size_t j = 0; j < spec_.n(); ++j) local.alphas[j] = spec_.alphas[j] + spec_.params.lambdas[j] * c.u;
    local.phi0 = c.phis;
    local.theta0 = c.theta;
    local.s0 = c.s;
    std::vector<double> grid;
    for (auto i : groups[k]) grid.push_back(ps[i]);
    auto tr = integrate_reduced(local, grid, opt);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      auto st = tr.samples[g];
      st.u += c.u;
      out[groups[k][g]] = std::move(st);
    }
  }
  return out;
}

std::vector<CurvePoint> OdeCurve::points(std::span<const double> ps) const {
  const auto sts = states(ps);
  const std::size_t n = spec_.n();
  std::vector<CurvePoint> out;
  out.reserve(sts.size());
  for (const auto& st : sts) {
    CurvePoint cp;
    cp.p = st.s;
    cp.theta = st.theta;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::sqrt(spec_.alphas[j] + spec_.params.lambdas[j] * st.u);
      cp.w.push_back(std::polar(r, st.phis[j]));
    }
    cp.dw.resize(n);
    double dth = 0.0;
    full_rhs(spec_.params, cp.w, cp.theta, cp.dw, dth);
    out.push_back(std::move(cp));
  }
  return out;
}

}  // namespace lagsol
