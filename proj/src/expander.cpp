#include "lagsol/expander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "lagsol/errors.hpp"
#include "lagsol/io.hpp"
#include "lagsol/quadrature.hpp"

namespace lagsol {

namespace {

using std::numbers::pi;
constexpr double kQuadTol = 1e-12;

// log1p(x)/x, continuous at 0.
double log1p_over(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x / 2.0 + x * x / 3.0 - x * x * x / 4.0;
  return std::log1p(x) / x;
}

// log(expm1(S)/S) for S >= 0.
double log_g(double S) {
  if (S < 1e-8) return S / 2.0 + S * S / 24.0;
  if (S < 30.0) return std::log(std::expm1(S) / S);
  return S + std::log1p(-std::exp(-S)) - std::log(S);
}

// Pieces of P at t shared by the integrands.
struct PParts {
  double sigma;  // S / t^2
  double S;      // sum log(1 + a t^2) + alpha t^2
  double logP;
};

PParts p_parts(double alpha, std::span<const double> a, double t) {
  const double t2 = t * t;
  double sigma = alpha;
  for (double ak : a) sigma += ak * log1p_over(ak * t2);
  const double S = sigma * t2;
  if (!(sigma > 0.0)) {
    throw ValidationError("P is undefined here: need alpha >= 0 with positive a_j");
  }
  return {sigma, S, std::log(sigma) + log_g(S)};
}

// t^2 / (1 - e^{-S}), continuous at t = 0.
double t2_over_one_minus_exp(const PParts& pp, double t) {
  if (pp.S < 1e-8) return (1.0 + pp.S / 2.0 + pp.S * pp.S / 12.0) / pp.sigma;
  return t * t / (-std::expm1(-pp.S));
}

double phi_integrand(double alpha, std::span<const double> a, std::size_t j, double t) {
  const auto pp = p_parts(alpha, a, t);
  return a[j] / (1.0 + a[j] * t * t) * std::exp(-0.5 * pp.logP);
}

// Integral over [0, inf): [0,1], then y = e^tau up to the scale Y where
// e^{alpha y^2} takes over, then the tail through y = Y/v.
template <class F>
double half_line(F&& f, double alpha) {
  const double Y = alpha > 0.0 ? std::max(1.0, 1.0 / std::sqrt(alpha)) : 1.0;
  double total = quad::integrate(f, 0.0, 1.0, kQuadTol);
  if (Y > 1.0) {
    total += quad::integrate([&](double tau) { return f(std::exp(tau)) * std::exp(tau); }, 0.0,
                             std::log(Y), kQuadTol);
  }
  total += quad::integrate(
      [&](double v) {
        if (v <= 0.0) return 0.0;
        return f(Y / v) * Y / (v * v);
      },
      0.0, 1.0, kQuadTol);
  return total;
}

struct Scaled {
  double alpha;
  std::vector<double> a;
};

// The integrals are invariant under (alpha, a) -> (alpha/t, a/t); use t = sum a.
Scaled scaled(double alpha, std::span<const double> a) {
  const double t = std::accumulate(a.begin(), a.end(), 0.0);
  Scaled s{alpha / t, {}};
  for (double ak : a) s.a.push_back(ak / t);
  return s;
}

void check_a(double alpha, std::span<const double> a) {
  if (a.empty()) throw ValidationError("need at least one a_j");
  for (double ak : a) {
    if (!(ak > 0.0) || !std::isfinite(ak)) throw ValidationError("every a_j must be positive");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be >= 0");
}

// pi/2 - sum phibar = alpha int_0^inf dy / sqrt(P).
double angle_deficit(const Scaled& s) {
  if (s.alpha == 0.0) return 0.0;
  return s.alpha * half_line([&](double y) { return std::exp(-0.5 * p_parts(s.alpha, s.a, y).logP); }, s.alpha);
}

double deficit_log_derivative(const Scaled& s, std::size_t k) {
  return -0.5 * s.alpha * half_line([&](double y) {
    const auto pp = p_parts(s.alpha, s.a, y);
    const double q = s.a[k] * t2_over_one_minus_exp(pp, y) / (1.0 + s.a[k] * y * y);
    return q * std::exp(-0.5 * pp.logP);
  }, s.alpha);
}

std::string format_vector(const std::vector<double>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << io::fmt(v[i]);
  os << ')';
  return os.str();
}

}  // namespace

void validate(const ExpanderProfile& profile) {
  check_a(profile.alpha, profile.a);
  if (profile.psi.size() != profile.a.size()) throw ValidationError("psi must have one entry per a_j");
}

double AngleVector::sum() const { return std::accumulate(phibar.begin(), phibar.end(), 0.0); }

double log_P(double alpha, std::span<const double> a, double t) { return p_parts(alpha, a, t).logP; }

double eval_P(double alpha, std::span<const double> a, double t) { return std::exp(log_P(alpha, a, t)); }

double eval_P(const ExpanderProfile& profile, double t) { return eval_P(profile.alpha, profile.a, t); }

std::vector<ProfileValue> profile_eval(const ExpanderProfile& profile, std::span<const double> ys) {
  validate(profile);
  const std::size_t n = profile.n();
  // phi_j - psi_j is odd in y: integrate outward over sorted |y|.
  std::vector<std::size_t> order(ys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return std::abs(ys[l]) < std::abs(ys[r]); });

  std::vector<ProfileValue> out(ys.size());
  std::vector<double> acc(n, 0.0);
  double prev = 0.0;
  for (auto i : order) {
    const double y = ys[i];
    if (!std::isfinite(y)) throw ValidationError("y must be finite");
    const double ay = std::abs(y);
    if (ay > prev) {
      for (std::size_t j = 0; j < n; ++j) {
        acc[j] += quad::integrate([&](double t) { return phi_integrand(profile.alpha, profile.a, j, t); },
                                  prev, ay, kQuadTol);
      }
      prev = ay;
    }
    ProfileValue v;
    v.y = y;
    double sum_phi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      v.r.push_back(std::sqrt(1.0 / profile.a[j] + y * y));
      v.phi.push_back(profile.psi[j] + (y < 0.0 ? -acc[j] : acc[j]));
      sum_phi += v.phi.back();
    }
    const double inv_sqrt_p = std::exp(-0.5 * log_P(profile.alpha, profile.a, y));
    v.theta = sum_phi + std::atan2(inv_sqrt_p, y);
    out[i] = std::move(v);
  }
  return out;
}

ProfileValue profile_eval(const ExpanderProfile& profile, double y) {
  return profile_eval(profile, std::span<const double>(&y, 1)).front();
}

AngleVector asymptotic_angles(const ExpanderProfile& profile) {
  validate(profile);
  AngleVector out;
  for (std::size_t j = 0; j < profile.n(); ++j) {
    out.phibar.push_back(quad::integrate(
        [&](double xi) {
          const double t = std::tan(xi);
          const double c = std::cos(xi);
          if (!std::isfinite(t) || c == 0.0) return 0.0;
          return phi_integrand(profile.alpha, profile.a, j, t) / (c * c);
        },
        0.0, pi / 2, kQuadTol));
  }
  return out;
}

PlaneReport plane_report(const ExpanderProfile& profile) {
  const auto ang = asymptotic_angles(profile);
  PlaneReport rep;
  for (std::size_t j = 0; j < profile.n(); ++j) {
    rep.L1.push_back(profile.psi[j] + ang.phibar[j]);
    rep.L2.push_back(profile.psi[j] - ang.phibar[j]);
  }
  rep.sum = ang.sum();
  return rep;
}

AngleVector angle_map(double alpha, std::span<const double> a) {
  check_a(alpha, a);
  const auto s = scaled(alpha, a);
  AngleVector out;
  for (std::size_t j = 0; j < a.size(); ++j) {
    out.phibar.push_back(half_line([&](double y) { return phi_integrand(s.alpha, s.a, j, y); }, s.alpha));
  }
  return out;
}

Eigen::MatrixXd angle_map_log_jacobian(double alpha, std::span<const double> a) {
  check_a(alpha, a);
  const auto s = scaled(alpha, a);
  const std::size_t n = a.size();
  Eigen::MatrixXd J(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      J(j, k) = half_line([&](double y) {
        const auto pp = p_parts(s.alpha, s.a, y);
        const double y2 = y * y;
        const double f = s.a[j] / (1.0 + s.a[j] * y2) * std::exp(-0.5 * pp.logP);
        const double q = s.a[k] * t2_over_one_minus_exp(pp, y) / (1.0 + s.a[k] * y2);
        return f * ((j == k ? 1.0 / (1.0 + s.a[j] * y2) : 0.0) - 0.5 * q);
      }, s.alpha);
    }
  }
  return J;
}

Eigen::MatrixXd angle_map_jacobian(double alpha, std::span<const double> a) {
  Eigen::MatrixXd J = angle_map_log_jacobian(alpha, a);
  for (Eigen::Index k = 0; k < J.cols(); ++k) J.col(k) /= a[static_cast<std::size_t>(k)];
  return J;
}

namespace {

// Square system in log a whose root is the inverse image of the target:
// phibar_1..phibar_{n-1} together with log(pi/2 - sum) (alpha > 0) or
// log(sum a) (alpha = 0).
struct InverseSystem {
  double alpha;
  std::vector<double> target;
  double log_deficit_target;

  Eigen::VectorXd value(const std::vector<double>& a) const {
    const std::size_t n = a.size();
    Eigen::VectorXd F(static_cast<Eigen::Index>(n));
    const auto s = scaled(alpha, a);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      F[j] = half_line([&](double y) { return phi_integrand(s.alpha, s.a, j, y); }, s.alpha) - target[j];
    }
    if (alpha > 0.0) {
      F[n - 1] = std::log(angle_deficit(s)) - log_deficit_target;
    } else {
      F[n - 1] = std::log(std::accumulate(a.begin(), a.end(), 0.0));
    }
    return F;
  }

  Eigen::MatrixXd jacobian(const std::vector<double>& a) const {
    const std::size_t n = a.size();
    Eigen::MatrixXd J = angle_map_log_jacobian(alpha, a);
    const auto s = scaled(alpha, a);
    if (alpha > 0.0) {
      const double eps = angle_deficit(s);
      for (std::size_t k = 0; k < n; ++k) J(n - 1, k) = deficit_log_derivative(s, k) / eps;
    } else {
      const double tot = std::accumulate(a.begin(), a.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) J(n - 1, k) = a[k] / tot;
    }
    return J;
  }
};

// Symmetric a = c(1,...,1) whose angles have the requested sum.
double symmetric_scale(double alpha, std::size_t n, double deficit) {
  using boost::math::tools::toms748_solve;
  auto f = [&](double logc) {
    std::vector<double> a(n, std::exp(logc));
    return std::log(angle_deficit(scaled(alpha, a))) - std::log(deficit);
  };
  double lo = 0.0, hi = 0.0;
  double flo = f(lo), fhi = flo;
  // deficit decreases as c grows
  if (flo > 0.0) {
    hi = 2.0;
    while ((fhi = f(hi)) > 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      if (hi > 400.0) throw NonConvergence("could not bracket the symmetric starting point");
    }
  } else {
    lo = -2.0;
    while ((flo = f(lo)) < 0.0) {
      hi = lo;
      fhi = flo;
      lo *= 2.0;
      if (lo < -400.0) throw NonConvergence("could not bracket the symmetric starting point");
    }
  }
  boost::uintmax_t iters = 100;
  auto r = toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (r.first + r.second));
}

bool newton(const InverseSystem& sys, std::vector<double>& a, const InversionOptions& opt, int& iters) {
  const std::size_t n = a.size();
  Eigen::VectorXd F = sys.value(a);
  for (int it = 0; it < opt.max_iter; ++it) {
    ++iters;
    if (F.cwiseAbs().maxCoeff() < opt.tol) return true;
    const Eigen::MatrixXd J = sys.jacobian(a);
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-F);
    if (!step.allFinite()) return false;
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h, lambda *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = a[k] * std::exp(lambda * step[k]);
      Eigen::VectorXd Ft;
      try {
        Ft = sys.value(trial);
      } catch (const NumericalError&) {
        continue;
      }
      if (Ft.allFinite() && Ft.norm() < F.norm()) {
        a = std::move(trial);
        F = std::move(Ft);
        improved = true;
        break;
      }
    }
    if (!improved) return F.cwiseAbs().maxCoeff() < opt.tol;
  }
  return F.cwiseAbs().maxCoeff() < opt.tol;
}

}  // namespace

InversionResult invert_angle_map(double alpha, const AngleVector& target, const InversionOptions& opt) {
  const std::size_t n = target.phibar.size();
  if (n == 0) throw InvalidTarget("empty target");
  if (!(alpha >= 0.0)) throw InvalidTarget("alpha must be >= 0 for expanders");
  for (double t : target.phibar) {
    if (!(t > 0.0 && t < pi / 2) && !(n == 1 && alpha == 0.0)) {
      throw InvalidTarget("every target angle must lie in (0, pi/2)");
    }
  }
  const double sum = target.sum();
  InversionResult res;
  if (alpha > 0.0 && !(sum < pi / 2)) {
    throw InvalidTarget("angle sum must be < pi/2 when alpha > 0 (got " + io::fmt(sum) + ")");
  }
  if (alpha == 0.0 && std::abs(sum - pi / 2) > 1e-8) {
    throw InvalidTarget("angle sum must equal pi/2 when alpha = 0 (got " + io::fmt(sum) + ")");
  }
  if (alpha == 0.0 && n == 1) {
    res.a = {1.0};
    res.achieved = angle_map(alpha, res.a);
    res.residual = std::abs(res.achieved.phibar[0] - target.phibar[0]);
    return res;
  }

  const double deficit = pi / 2 - sum;
  std::vector<double> a(n, alpha > 0.0 ? symmetric_scale(alpha, n, deficit) : 1.0 / n);
  const std::vector<double> sym(n, sum / n);

  // Continuation from the symmetric target, refining the path on failure.
  double tau = 0.0, dtau = 1.0;
  int iters = 0;
  while (tau < 1.0) {
    const double next = std::min(1.0, tau + dtau);
    InverseSystem sys{alpha, {}, alpha > 0.0 ? std::log(deficit) : 0.0};
    for (std::size_t j = 0; j < n; ++j) sys.target.push_back(sym[j] + next * (target.phibar[j] - sym[j]));
    std::vector<double> trial = a;
    InversionOptions inner = opt;
    if (next < 1.0) inner.tol = std::max(opt.tol, 1e-6);
    if (newton(sys, trial, inner, iters)) {
      a = std::move(trial);
      tau = next;
      dtau = std::min(1.0, 2.0 * dtau);
    } else {
      dtau *= 0.5;
      if (dtau < 1e-4) {
        throw NonConvergence("angle-map inversion stalled; last iterate a = " + format_vector(a));
      }
    }
  }

  res.a = a;
  res.iterations = iters;
  res.achieved = angle_map(alpha, a);
  for (std::size_t j = 0; j < n; ++j) {
    res.residual = std::max(res.residual, std::abs(res.achieved.phibar[j] - target.phibar[j]));
  }
  return res;
}

ExpanderCurve::ExpanderCurve(ExpanderProfile profile) : profile_(std::move(profile)) {
  validate(profile_);
  params_.lambdas.assign(profile_.n(), 1.0);
  params_.C = 1.0;
  params_.alpha = profile_.alpha;
}

std::vector<CurvePoint> ExpanderCurve::points(std::span<const double> ys) const {
  const auto vals = profile_eval(profile_, ys);
  const std::size_t n = profile_.n();
  std::vector<CurvePoint> out;
  out.reserve(ys.size());
  double log_prod_a = 0.0;
  for (double ak : profile_.a) log_prod_a += std::log(ak);
  for (const auto& v : vals) {
    CurvePoint cp;
    cp.p = v.y;
    cp.theta = v.theta;
    const double lp = log_P(profile_.alpha, profile_.a, v.y);
    const double inv_sqrt_p = std::exp(-0.5 * lp);
    for (std::size_t j = 0; j < n; ++j) {
      const auto e = std::polar(1.0, v.phi[j]);
      const double dr = v.y / v.r[j];
      const double dphi = profile_.a[j] / (1.0 + profile_.a[j] * v.y * v.y) * inv_sqrt_p;
      cp.w.push_back(v.r[j] * e);
      cp.dw.push_back(std::complex<double>(dr, v.r[j] * dphi) * e);
    }
    cp.ds_dp = std::exp(0.5 * (log_prod_a + profile_.alpha * v.y * v.y - lp));
    out.push_back(std::move(cp));
  }
  return out;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileValue>& values) {
  const std::size_t n = values.empty() ? 0 : values.front().r.size();
  std::vector<std::string> header{"y"};
  for (auto& h : io::indexed("r", n)) header.push_back(h);
  for (auto& h : io::indexed("phi", n)) header.push_back(h);
  header.push_back("theta");
  io::write_header(out, header);
  std::vector<double> row;
  for (const auto& v : values) {
    row.assign({v.y});
    row.insert(row.end(), v.r.begin(), v.r.end());
    row.insert(row.end(), v.phi.begin(), v.phi.end());
    row.push_back(v.theta);
    io::write_row(out, row);
  }
}

}  // namespace lagsol
