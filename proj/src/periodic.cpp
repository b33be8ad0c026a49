#include "lagsol/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "lagsol/errors.hpp"
#include "lagsol/io.hpp"
#include "lagsol/quadrature.hpp"

namespace lagsol {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_params(const SolitonParams& p, std::size_t n_alphas) {
  validate(p);
  if (!p.is_normalized()) throw ValidationError("periodic data needs normalized parameters (C = 1, lambda = +-1)");
  if (p.n() != n_alphas) throw ValidationError("alphas and lambdas differ in length");
  const std::size_t m = p.m();
  if (m == p.n() && !(p.alpha < 0.0)) throw ValidationError("all lambda_j = +1 needs alpha < 0");
  if (m == 0 && !(p.alpha > 0.0)) throw ValidationError("all lambda_j = -1 needs alpha > 0");
}

void check_alphas(std::span<const double> alphas) {
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alpha_j must be positive and finite");
  }
}

double dlogG(const SolitonParams& p, std::span<const double> alphas, double u) {
  double d = p.alpha;
  for (std::size_t j = 0; j < alphas.size(); ++j) d += p.lambdas[j] / (alphas[j] + p.lambdas[j] * u);
  return d;
}

// k-th probe from `from` toward `end`: geometric in the gap for a finite
// end, doubling steps for an infinite one.
double toward(double from, double end, int k) {
  if (std::isfinite(end)) return end + (from - end) * std::ldexp(1.0, -k);
  const double step = std::ldexp(1.0, k);
  return end > 0 ? from + step : from - step;
}

template <class F>
double solve_bracket(F&& f, double lo, double hi) {
  using boost::math::tools::toms748_solve;
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto r = toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

// Finds x in (end side of `from`) where g changes sign, g(from) > 0 and
// g -> negative toward `end`.
template <class F>
double root_toward(F&& g, double from, double end) {
  double inner = from;
  for (int k = 1; k < 1100; ++k) {
    const double x = toward(from, end, k);
    if (x == inner || x == end) break;
    const double gx = g(x);
    if (!(gx > 0.0)) return x > inner ? solve_bracket(g, inner, x) : solve_bracket(g, x, inner);
    inner = x;
  }
  throw NonConvergence("no sign change found toward the end of the domain");
}

// log Q_rel at distance d from an anchor u0: sum log1p(lambda_j d/(alpha_j+lambda_j u0)) + alpha d.
double log_ratio(const PeriodicSpec& s, double u0, double d) {
  double acc = s.params.alpha * d;
  for (std::size_t j = 0; j < s.n(); ++j) {
    acc += std::log1p(s.params.lambdas[j] * d / (s.alphas[j] + s.params.lambdas[j] * u0));
  }
  return acc;
}

// Integral over one orbit branch of weight(v) dv / sqrt(G(v) - A^2),
// with v = u1 + (u2 - u1) sin^2 xi.
template <class W>
double orbit_integral(const PeriodicSpec& s, const TurningPoints& tp, W&& weight, double rel_tol) {
  const double du = tp.u2 - tp.u1;
  if (!(du > 0.0)) throw NumericalError("degenerate turning points");
  const double A = s.A;
  auto f = [&](double xi) {
    const double sn = std::sin(xi), cs = std::cos(xi);
    double v, D;
    if (xi < pi / 4) {
      const double d = du * sn * sn;
      v = tp.u1 + d;
      D = log_ratio(s, tp.u1, d);
    } else {
      const double d = du * cs * cs;
      v = tp.u2 - d;
      D = log_ratio(s, tp.u2, -d);
    }
    if (!(D > 0.0)) return 0.0;
    // sqrt(G - A^2) = A sqrt(expm1(D))
    return weight(v) * 2.0 * du * sn * cs / (A * std::sqrt(std::expm1(D)));
  };
  return quad::integrate(f, 0.0, pi / 4, rel_tol) + quad::integrate(f, pi / 4, pi / 2, rel_tol);
}

long gcd_l(long a, long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

}  // namespace

std::string to_string(CaseTag c) { return c == CaseTag::i ? "i" : "ii"; }

double PeriodicSpec::beta1() const {
  double b = -kInf;
  for (std::size_t j = 0; j < n(); ++j) {
    if (params.lambdas[j] > 0) b = std::max(b, -alphas[j]);
  }
  return b;
}

double PeriodicSpec::beta2() const {
  double b = kInf;
  for (std::size_t j = 0; j < n(); ++j) {
    if (params.lambdas[j] < 0) b = std::min(b, alphas[j]);
  }
  return b;
}

double PeriodicSpec::log_G_rel(double u) const { return log_ratio(*this, 0.0, u); }

double PeriodicSpec::log_G0() const {
  double acc = 0.0;
  for (double a : alphas) acc += std::log(a);
  return acc;
}

double critical_point(const SolitonParams& params, std::span<const double> alphas) {
  check_params(params, alphas.size());
  check_alphas(alphas);
  PeriodicSpec tmp{params, std::vector<double>(alphas.begin(), alphas.end()), 1.0};
  auto g = [&](double u) { return dlogG(params, alphas, u); };
  const double b1 = tmp.beta1(), b2 = tmp.beta2();
  const double g0 = g(0.0);
  if (g0 == 0.0) return 0.0;
  double u = g0 > 0 ? root_toward(g, 0.0, b2)
                    : root_toward([&](double x) { return -g(x); }, 0.0, b1);
  // Newton polish; d/du of g is -sum lambda^2/(alpha+lambda u)^2.
  for (int it = 0; it < 3; ++it) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const double r = alphas[j] + params.lambdas[j] * u;
      d2 -= 1.0 / (r * r);
    }
    const double next = u - g(u) / d2;
    if (!(next > b1 && next < b2)) break;
    u = next;
  }
  return u;
}

PeriodicSpec make_periodic_spec(const SolitonParams& params, std::vector<double> alphas, double A) {
  check_params(params, alphas.size());
  check_alphas(alphas);
  if (!(A > 0.0) || !std::isfinite(A)) throw ValidationError("A must be positive");
  const double us = critical_point(params, alphas);
  for (std::size_t j = 0; j < alphas.size(); ++j) alphas[j] += params.lambdas[j] * us;
  PeriodicSpec s{params, std::move(alphas), A * std::exp(-0.5 * params.alpha * us)};
  validate(s);
  return s;
}

PeriodicSpec make_periodic_spec(const TrajectorySpec& spec) {
  validate(spec);
  return make_periodic_spec(spec.params, spec.alphas, spec.A());
}

void validate(const PeriodicSpec& spec) {
  check_params(spec.params, spec.n());
  check_alphas(spec.alphas);
  if (!(spec.A > 0.0) || !std::isfinite(spec.A)) throw ValidationError("A must be positive");
  double scale = std::abs(spec.params.alpha);
  for (std::size_t j = 0; j < spec.n(); ++j) scale += 1.0 / spec.alphas[j];
  if (std::abs(dlogG(spec.params, spec.alphas, 0.0)) > 1e-10 * scale) {
    throw ValidationError("periodic data must be re-based so that u_* = 0");
  }
  if (2.0 * std::log(spec.A) > spec.log_G0() + 2e-12) {
    throw ValidationError("A exceeds G(0)^(1/2): no orbit");
  }
}

CaseTag classify_case(const PeriodicSpec& spec) {
  validate(spec);
  // A^2 = G(0) within 1e-12 relative
  return spec.log_G0() - 2.0 * std::log(spec.A) <= 1e-12 ? CaseTag::i : CaseTag::ii;
}

TrajectorySpec trajectory_spec(const PeriodicSpec& spec, std::span<const double> psi) {
  validate(spec);
  TrajectorySpec t;
  t.params = spec.params;
  t.alphas = spec.alphas;
  t.phi0.assign(spec.n(), 0.0);
  if (!psi.empty()) {
    if (psi.size() != spec.n()) throw ValidationError("psi has the wrong length");
    t.phi0.assign(psi.begin(), psi.end());
  }
  const double ratio = std::min(1.0, std::exp(std::log(spec.A) - 0.5 * spec.log_G0()));
  t.theta0 = std::accumulate(t.phi0.begin(), t.phi0.end(), 0.0) - std::asin(ratio);
  t.s0 = 0.0;
  return t;
}

HamiltonianStationary::HamiltonianStationary(PeriodicSpec spec, std::vector<double> psi)
    : spec_(std::move(spec)), psi_(std::move(psi)) {
  if (classify_case(spec_) != CaseTag::i) throw CaseMismatch("explicit solution needs case (i): A^2 = G(0)");
  if (psi_.empty()) psi_.assign(spec_.n(), 0.0);
  if (psi_.size() != spec_.n()) throw ValidationError("psi has the wrong length");
}

ReducedState HamiltonianStationary::state(double s) const {
  ReducedState st;
  st.s = s;
  st.u = 0.0;
  const double A = spec_.A;
  double sum = 0.0;
  for (std::size_t j = 0; j < spec_.n(); ++j) {
    st.phis.push_back(psi_[j] - spec_.params.lambdas[j] * A * s / spec_.alphas[j]);
    sum += psi_[j];
  }
  st.theta = sum - pi / 2 + spec_.params.alpha * A * s;
  return st;
}

std::vector<CurvePoint> HamiltonianStationary::points(std::span<const double> ss) const {
  std::vector<CurvePoint> out;
  out.reserve(ss.size());
  for (double s : ss) {
    const auto st = state(s);
    CurvePoint cp;
    cp.p = s;
    cp.theta = st.theta;
    for (std::size_t j = 0; j < spec_.n(); ++j) {
      const auto w = std::polar(std::sqrt(spec_.alphas[j]), st.phis[j]);
      cp.w.push_back(w);
      cp.dw.push_back(std::complex<double>(0.0, -spec_.params.lambdas[j] * spec_.A / spec_.alphas[j]) * w);
    }
    out.push_back(std::move(cp));
  }
  return out;
}

TurningPoints turning_points(const PeriodicSpec& spec) {
  // F(u) = log G(u) - log A^2, positive at 0 in case (ii).
  const double c0 = spec.log_G0() - 2.0 * std::log(spec.A);
  if (!(c0 > 0.0)) throw CaseMismatch("turning points need case (ii): A^2 < G(0)");
  auto F = [&](double u) {
    const double b1 = spec.beta1(), b2 = spec.beta2();
    if (u <= b1 || u >= b2) return -kInf;
    return spec.log_G_rel(u) + c0;
  };
  TurningPoints tp;
  tp.u1 = root_toward(F, 0.0, spec.beta1());
  tp.u2 = root_toward(F, 0.0, spec.beta2());
  return tp;
}

double period(const PeriodicSpec& spec, const TurningPoints& tp, double rel_tol) {
  // S = int e^{alpha v/2} dv / sqrt(G - A^2)
  const double a = spec.params.alpha;
  return orbit_integral(spec, tp, [&](double v) { return std::exp(0.5 * a * v); }, rel_tol);
}

std::vector<double> holonomies(const PeriodicSpec& spec, const TurningPoints& tp, double rel_tol) {
  std::vector<double> g(spec.n());
  for (std::size_t j = 0; j < spec.n(); ++j) {
    const double lam = spec.params.lambdas[j], aj = spec.alphas[j];
    g[j] = -spec.A * lam *
           orbit_integral(spec, tp, [&](double v) { return 1.0 / (aj + lam * v); }, rel_tol);
  }
  return g;
}

std::vector<double> limit_gamma(const PeriodicSpec& spec) {
  double s2 = 0.0;
  for (double a : spec.alphas) s2 += 1.0 / (a * a);
  const double denom = std::sqrt(2.0 * s2);
  std::vector<double> g;
  for (std::size_t j = 0; j < spec.n(); ++j) g.push_back(-2.0 * pi * spec.params.lambdas[j] / spec.alphas[j] / denom);
  return g;
}

double limit_period(const PeriodicSpec& spec) {
  double s2 = 0.0;
  for (double a : spec.alphas) s2 += 1.0 / (a * a);
  return 2.0 * pi / std::sqrt(2.0 * std::exp(spec.log_G0()) * s2);
}

PeriodicOrbit compute_orbit(const PeriodicSpec& spec) {
  PeriodicOrbit o;
  o.case_tag = classify_case(spec);
  if (o.case_tag == CaseTag::i) {
    o.S = limit_period(spec);
    for (std::size_t j = 0; j < spec.n(); ++j) {
      o.gamma.push_back(-spec.params.lambdas[j] * spec.A * o.S / spec.alphas[j]);
    }
    return o;
  }
  const double gap = -std::expm1(2.0 * std::log(spec.A) - spec.log_G0());
  if (gap < 1e-10) {
    o.warning = "orbit is within 1e-10 of case (i); quadratures are ill-conditioned";
  }
  // the integrand is only known to ~1e-10 relative this close to case (i)
  const double tol = o.warning ? 1e-8 : 1e-12;
  const auto tp = turning_points(spec);
  o.u1 = tp.u1;
  o.u2 = tp.u2;
  o.S = period(spec, tp, tol);
  o.gamma = holonomies(spec, tp, tol);
  return o;
}

std::string topology_tag(const SolitonParams& params) {
  const std::size_t n = params.n(), m = params.m();
  if (m == n) return "S1xS" + std::to_string(n - 1) + " compact";
  if (m == 0) return "none";
  return "S1xS" + std::to_string(m - 1) + "xR" + std::to_string(n - m) + " closed";
}

std::optional<std::pair<long, long>> rational_approx(double x, double tol, long qmax) {
  if (!std::isfinite(x)) return std::nullopt;
  // convergents h/k of the continued fraction of x
  long h0 = 1, h1 = static_cast<long>(std::floor(x)), k0 = 0, k1 = 1;
  double frac = x - std::floor(x);
  while (true) {
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) < tol) return std::make_pair(h1, k1);
    if (frac < 1e-15) return std::nullopt;
    const double inv = 1.0 / frac;
    const double a = std::floor(inv);
    frac = inv - a;
    if (a > static_cast<double>(qmax)) return std::nullopt;
    const long ai = static_cast<long>(a);
    const long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > qmax) return std::nullopt;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
  }
}

Periodicity detect_periodicity(const PeriodicSpec& spec, const PeriodicOrbit& orbit, double tol, long qmax) {
  if (!(tol > 0.0)) tol = 1e-9 * static_cast<double>(qmax);
  Periodicity out;
  const std::size_t n = spec.n();
  if (orbit.case_tag == CaseTag::i) {
    // lambda_j/alpha_j = mu q_j with integer q_j of gcd 1
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = spec.params.lambdas[j] / spec.alphas[j];
    long D = 1;
    std::vector<std::pair<long, long>> fr;
    for (std::size_t j = 0; j < n; ++j) {
      auto f = rational_approx(c[j] / c[0], tol, qmax);
      if (!f) return out;
      fr.push_back(*f);
      D = std::lcm(D, f->second);
      if (D > qmax) return out;
    }
    std::vector<long> N(n);
    long g = 0;
    for (std::size_t j = 0; j < n; ++j) {
      N[j] = fr[j].first * (D / fr[j].second);
      g = gcd_l(g, N[j]);
    }
    const long sgn = c[0] > 0 ? 1 : -1;
    for (std::size_t j = 0; j < n; ++j) out.p.push_back(sgn * N[j] / g);
    out.mu = c[0] / static_cast<double>(out.p[0]);
    out.r = 1;
    out.periodic = true;
    out.T = 2.0 * pi / (spec.A * out.mu);
    out.topology = topology_tag(spec.params);
    return out;
  }
  long r = 1;
  std::vector<std::pair<long, long>> fr;
  for (std::size_t j = 0; j < n; ++j) {
    auto f = rational_approx(orbit.gamma[j] / (2.0 * pi), tol / (2.0 * pi), qmax);
    if (!f) return out;
    fr.push_back(*f);
    r = std::lcm(r, f->second);
    if (r > qmax) return out;
  }
  for (std::size_t j = 0; j < n; ++j) out.p.push_back(fr[j].first * (r / fr[j].second));
  out.r = r;
  out.periodic = true;
  out.T = static_cast<double>(r) * orbit.S;
  out.topology = topology_tag(spec.params);
  return out;
}

std::vector<double> holonomy_map(const SolitonParams& params, std::span<const double> alphas, double A) {
  check_params(params, alphas.size());
  check_alphas(alphas);
  PeriodicSpec s{params, std::vector<double>(alphas.begin(), alphas.end()), A};
  return holonomies(s, turning_points(s));
}

Eigen::MatrixXd holonomy_jacobian(const PeriodicSpec& spec, double h) {
  validate(spec);
  const auto n = static_cast<Eigen::Index>(spec.n());
  // tangent directions of sum lambda_j/alpha_j = -alpha, in log alpha:
  // sum (lambda_j/alpha_j) dlog alpha_j = 0
  Eigen::RowVectorXd c(n);
  for (Eigen::Index j = 0; j < n; ++j) c[j] = spec.params.lambdas[static_cast<std::size_t>(j)] / spec.alphas[static_cast<std::size_t>(j)];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  Eigen::MatrixXd K = lu.kernel();
  if (K.cols() > 0) K = Eigen::HouseholderQR<Eigen::MatrixXd>(K).householderQ() * Eigen::MatrixXd::Identity(n, K.cols());
  Eigen::MatrixXd J(n, K.cols() + 1);
  auto eval = [&](const Eigen::VectorXd& dl, double dA) {
    std::vector<double> al(spec.alphas);
    for (Eigen::Index j = 0; j < n; ++j) al[static_cast<std::size_t>(j)] *= std::exp(dl[j]);
    const auto g = holonomy_map(spec.params, al, spec.A * std::exp(dA));
    return Eigen::Map<const Eigen::VectorXd>(g.data(), n).eval();
  };
  for (Eigen::Index k = 0; k < K.cols(); ++k) {
    J.col(k) = (eval(h * K.col(k), 0.0) - eval(-h * K.col(k), 0.0)) / (2 * h);
  }
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  J.col(K.cols()) = (eval(z, h) - eval(z, -h)) / (2 * h);
  return J;
}

std::vector<ReductionRow> reduction_check(std::span<const PeriodicSpec> path,
                                          std::span<const double> reduced_gamma, bool drop_last) {
  std::vector<ReductionRow> rows;
  for (const auto& s : path) {
    if (reduced_gamma.size() + 1 != s.n()) throw ValidationError("reduced holonomies must have n - 1 entries");
    ReductionRow r;
    r.large = drop_last ? s.alphas.back() : s.alphas.front();
    r.gamma = holonomies(s, turning_points(s));
    const std::size_t off = drop_last ? 0 : 1;
    for (std::size_t j = 0; j < reduced_gamma.size(); ++j) {
      r.deviation = std::max(r.deviation, std::abs(r.gamma[j + off] - reduced_gamma[j]));
    }
    r.dropped = std::abs(drop_last ? r.gamma.back() : r.gamma.front());
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

// Coordinates on the constraint manifold: log alpha_j for j != k and
// logit(A / G(0)^{1/2}); alpha_k follows from the constraint.
struct Chart {
  SolitonParams params;
  std::size_t k = 0;

  std::optional<PeriodicSpec> spec(const Eigen::VectorXd& z) const {
    const std::size_t n = params.n();
    std::vector<double> al(n);
    double rest = -params.alpha;
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      al[j] = std::exp(z[static_cast<Eigen::Index>(i++)]);
      rest -= params.lambdas[j] / al[j];
    }
    const double ak = params.lambdas[k] / rest;
    if (!(ak > 0.0) || !std::isfinite(ak)) return std::nullopt;
    al[k] = ak;
    double lg0 = 0.0;
    for (double a : al) lg0 += std::log(a);
    const double t = z[static_cast<Eigen::Index>(n - 1)];
    const double logrho = -std::log1p(std::exp(-t));
    PeriodicSpec s{params, std::move(al), std::exp(0.5 * lg0 + logrho)};
    if (!(s.A > 0.0) || !std::isfinite(s.A) || logrho >= 0.0) return std::nullopt;
    return s;
  }

  Eigen::VectorXd coords(const PeriodicSpec& s) const {
    const std::size_t n = params.n();
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) z[static_cast<Eigen::Index>(i++)] = std::log(s.alphas[j]);
    }
    const double logrho = std::log(s.A) - 0.5 * s.log_G0();
    z[static_cast<Eigen::Index>(n - 1)] = logrho - std::log(-std::expm1(logrho));
    return z;
  }
};

std::optional<Eigen::VectorXd> psi_at(const Chart& ch, const Eigen::VectorXd& z) {
  auto s = ch.spec(z);
  if (!s) return std::nullopt;
  try {
    const auto g = holonomies(*s, turning_points(*s));
    return Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size())).eval();
  } catch (const NumericalError&) {
    return std::nullopt;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace

SearchResult periodic_search(const SolitonParams& params, std::span<const double> target,
                             const std::optional<PeriodicSpec>& seed, const SearchOptions& opt) {
  check_params(params, target.size());
  const std::size_t n = params.n();
  for (double g : target) {
    if (!std::isfinite(g)) throw InvalidTarget("target holonomies must be finite");
  }
  Chart ch{params, 0};
  // solve the constraint for a positive index when alpha < 0, else a negative one
  if (params.alpha < 0.0) ch.k = 0;
  else ch.k = params.m() < n ? n - 1 : 0;

  Eigen::VectorXd z;
  if (seed) {
    validate(*seed);
    z = ch.coords(*seed);
  } else {
    // lambda_j/alpha_j proportional to -target_j makes the small-oscillation
    // limit point along the target.
    const double sum = std::accumulate(target.begin(), target.end(), 0.0);
    double kappa = 1.0;
    if (params.alpha != 0.0) {
      if (sum == 0.0 || !(params.alpha / sum > 0.0)) throw InvalidTarget("target holonomy sum must have the sign of alpha");
      kappa = params.alpha / sum;
    }
    std::vector<double> al(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double cj = -kappa * target[j];
      if (!(params.lambdas[j] / cj > 0.0)) throw InvalidTarget("target holonomy " + std::to_string(j + 1) + " has the wrong sign for lambda_j");
      al[j] = params.lambdas[j] / cj;
    }
    // the constraint holds by the choice of kappa, so u_* = 0 already
    PeriodicSpec s1{params, std::move(al), 1.0};
    s1.A = 0.9 * std::exp(0.5 * s1.log_G0());
    validate(s1);
    z = ch.coords(s1);
  }
  const auto N = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd goal = Eigen::Map<const Eigen::VectorXd>(target.data(), N);
  auto g0 = psi_at(ch, z);
  if (!g0) throw NonConvergence("holonomy map could not be evaluated at the seed");
  const Eigen::VectorXd start = *g0;

  // continuation in tau from the seed's holonomies to the target
  double tau = 0.0, dtau = 1.0;
  int total = 0;
  Eigen::VectorXd cur = start;
  while (true) {
    const double next_tau = std::min(1.0, tau + dtau);
    const Eigen::VectorXd tgt = (1.0 - next_tau) * start + next_tau * goal;
    Eigen::VectorXd zz = z, gg = cur;
    bool ok = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      const Eigen::VectorXd res = gg - tgt;
      if (res.norm() < opt.tol) {
        ok = true;
        break;
      }
      ++total;
      Eigen::MatrixXd J(N, N);
      const double h = 1e-6;
      bool jac_ok = true;
      for (Eigen::Index c = 0; c < N && jac_ok; ++c) {
        Eigen::VectorXd zp = zz, zm = zz;
        zp[c] += h;
        zm[c] -= h;
        auto gp = psi_at(ch, zp), gm = psi_at(ch, zm);
        if (!gp || !gm) jac_ok = false;
        else J.col(c) = (*gp - *gm) / (2 * h);
      }
      if (!jac_ok) break;
      const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-res);
      double lam = 1.0;
      bool moved = false;
      for (int hv = 0; hv < opt.max_halvings; ++hv, lam *= 0.5) {
        const Eigen::VectorXd zn = zz + lam * step;
        auto gn = psi_at(ch, zn);
        if (gn && (*gn - tgt).norm() < res.norm()) {
          zz = zn;
          gg = *gn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (ok) {
      z = zz;
      cur = gg;
      tau = next_tau;
      if (tau >= 1.0) break;
      dtau = std::min(1.0, dtau * 2.0);
    } else {
      dtau *= 0.5;
      if (dtau < 1e-6) {
        throw NonConvergence("periodic-data search stalled at continuation parameter " + std::to_string(tau) +
                             ", holonomy residual " + std::to_string((cur - goal).norm()));
      }
    }
  }
  SearchResult out;
  out.spec = *ch.spec(z);
  out.gamma.assign(cur.data(), cur.data() + N);
  out.residual = (cur - goal).norm();
  out.iterations = total;
  return out;
}

FlowMember brakke_member(const SolitonParams& params, double t) {
  validate(params);
  FlowMember f;
  f.t = t;
  f.params = params;
  f.params.C = t;
  const std::size_t n = params.n(), m = params.m();
  if (t > 0) {
    f.topology = "S1xS" + std::to_string(m == 0 ? 0 : m - 1) + "xR" + std::to_string(n - m);
  } else if (t < 0) {
    f.topology = "S1xS" + std::to_string(n - m == 0 ? 0 : n - m - 1) + "xR" + std::to_string(m);
  } else {
    f.topology = "cone";
    f.singular_at_origin = true;
  }
  return f;
}

void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit, const Periodicity& per) {
  std::vector<std::string> header{"u1", "u2", "S"};
  for (auto& h : io::indexed("gamma", orbit.gamma.size())) header.push_back(h);
  header.insert(header.end(), {"case_tag", "periodic_r", "topology_tag"});
  io::write_header(out, header);
  out << io::fmt(orbit.u1) << ',' << io::fmt(orbit.u2) << ',' << io::fmt(orbit.S);
  for (double g : orbit.gamma) out << ',' << io::fmt(g);
  out << ',' << to_string(orbit.case_tag) << ',' << (per.periodic ? per.r : 0) << ','
      << (per.periodic ? per.topology : std::string("quasi-periodic")) << '\n';
}

}  // namespace lagsol
