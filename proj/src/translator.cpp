#include "lagsol/translator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lagsol/errors.hpp"
#include "lagsol/quadrature.hpp"
#include "lagsol/reduced_ode.hpp"

namespace lagsol {

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::complex<double> I{0.0, 1.0};

// int_0^y dt / sqrt(P(t)) for alpha = 0, split so each piece stays short.
double sl_integral(std::span<const double> a, double y) {
  if (y == 0.0) return 0.0;
  auto f = [&](double t) { return std::exp(-0.5 * log_P(0.0, a, t)); };
  const double sgn = y < 0 ? -1.0 : 1.0;
  const double Y = std::abs(y);
  double total = 0.0;
  double lo = 0.0;
  double hi = std::min(Y, 1.0);
  while (lo < Y) {
    total += quad::integrate(f, lo, hi);
    lo = hi;
    hi = std::min(Y, 4.0 * hi);
  }
  return sgn * total;
}

std::complex<double> conj_prod(const std::vector<std::complex<double>>& w) {
  std::complex<double> p{1.0, 0.0};
  for (const auto& wj : w) p *= wj;
  return std::conj(p);
}

double explicit_A(const ExpanderProfile& e) {
  double log_prod_a = 0.0;
  for (double ak : e.a) log_prod_a += std::log(ak);
  return -std::exp(0.5 * (e.alpha * e.u_star - log_prod_a));
}

}  // namespace

std::size_t TranslatorProfile::n() const {
  if (const auto* e = std::get_if<ExpanderProfile>(&base)) return e->n() + 1;
  return std::get<PeriodicBase>(base).spec.n() + 1;
}

void validate(const TranslatorProfile& profile) {
  if (!std::isfinite(profile.alpha) || !std::isfinite(profile.K.real()) || !std::isfinite(profile.K.imag()))
    throw ValidationError("translator: non-finite alpha or K");
  if (const auto* e = std::get_if<ExpanderProfile>(&profile.base)) {
    validate(*e);
    if (e->alpha != profile.alpha) throw ValidationError("translator: base alpha differs from alpha");
  } else {
    const auto& pb = std::get<PeriodicBase>(profile.base);
    validate(pb.spec);
    if (pb.spec.params.alpha != profile.alpha) throw ValidationError("translator: base alpha differs from alpha");
    if (!pb.psi.empty() && pb.psi.size() != pb.spec.n()) throw ValidationError("translator: psi has the wrong length");
  }
}

TranslatorProfile corollary_I_profile(double alpha, std::vector<double> a) {
  TranslatorProfile t;
  t.alpha = alpha;
  ExpanderProfile e;
  e.alpha = alpha;
  e.psi.assign(a.size(), 0.0);
  e.a = std::move(a);
  e.u_star = 0.0;
  validate(e);
  t.K = -0.5 * e.u_star;
  t.A = explicit_A(e);
  t.base = std::move(e);
  return t;
}

TranslatorProfile periodic_translator(PeriodicSpec spec, std::vector<double> psi, std::complex<double> K) {
  TranslatorProfile t;
  t.alpha = spec.params.alpha;
  t.A = spec.A;
  t.K = K;
  t.base = PeriodicBase{std::move(spec), std::move(psi)};
  validate(t);
  return t;
}

TranslatorProfile translate(const TranslatorProfile& profile, double t) {
  auto out = profile;
  out.K += t * profile.alpha;
  return out;
}

std::complex<double> beta_eval(const TranslatorProfile& profile, double p) {
  return TranslatorCurve(profile, std::min(p, 0.0), std::max(p, 0.0)).point(p).beta;
}

TranslatorCurve::TranslatorCurve(TranslatorProfile profile, double s_min, double s_max)
    : profile_(std::move(profile)) {
  validate(profile_);
  if (const auto* e = std::get_if<ExpanderProfile>(&profile_.base)) {
    base_ = std::make_shared<ExpanderCurve>(*e);
    return;
  }
  const auto& pb = std::get<PeriodicBase>(profile_.base);
  if (classify_case(pb.spec) == CaseTag::i) {
    base_ = std::make_shared<HamiltonianStationary>(pb.spec, pb.psi);
  } else {
    base_ = std::make_shared<OdeCurve>(trajectory_spec(pb.spec, pb.psi), std::min(s_min, 0.0),
                                       std::max(s_max, 0.0));
  }
}

std::vector<CurvePoint> TranslatorCurve::points(std::span<const double> ps) const {
  auto cps = base_->points(ps);
  const double alpha = profile_.alpha;
  std::vector<double> us(ps.size(), 0.0);
  if (const auto* e = std::get_if<ExpanderProfile>(&profile_.base)) {
    for (std::size_t i = 0; i < ps.size(); ++i) us[i] = e->u_star + ps[i] * ps[i];
  } else if (const auto* ode = dynamic_cast<const OdeCurve*>(base_.get())) {
    const auto sts = ode->states(ps);
    for (std::size_t i = 0; i < ps.size(); ++i) us[i] = sts[i].u;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& cp = cps[i];
    std::complex<double> b = 0.5 * us[i] + profile_.K;
    if (alpha != 0.0) {
      b -= I * (cp.theta / alpha);
    } else if (const auto* e = std::get_if<ExpanderProfile>(&profile_.base)) {
      b += I * sl_integral(e->a, ps[i]);
    } else {
      b -= I * (profile_.A * ps[i]);
    }
    cp.beta = b;
    cp.dbeta = std::polar(1.0, cp.theta) * conj_prod(cp.w) * cp.ds_dp;
  }
  return cps;
}

TranslatorReport translator_soliton_residual(const TranslatorCurve& curve,
                                             const std::vector<std::pair<std::vector<double>, double>>& samples) {
  const double alpha = curve.profile().alpha;
  if (alpha == 0.0) throw ValidationError("translator residual needs alpha != 0");
  TranslatorReport rep;
  rep.residuals = residual_report(curve, samples, true);
  rep.maslov = maslov_angle_check(curve, samples);
  rep.c_expected = alpha * curve.profile().K.imag();
  rep.c_error = std::abs(rep.maslov.c - rep.c_expected) + rep.maslov.max_residual;
  return rep;
}

TranslatorFlags translator_flags(const TranslatorCurve& curve, std::span<const double> ps) {
  TranslatorFlags f;
  const auto& prof = curve.profile();
  f.injective = prof.A != 0.0;
  f.im_beta_slope_sign = prof.A > 0 ? -1.0 : (prof.A < 0 ? 1.0 : 0.0);
  std::vector<double> sorted(ps.begin(), ps.end());
  std::sort(sorted.begin(), sorted.end());
  const auto cps = curve.points(sorted);
  f.sampled_monotone = f.injective;
  for (std::size_t i = 1; i < cps.size(); ++i) {
    const double d = cps[i].beta.imag() - cps[i - 1].beta.imag();
    if (!(d * f.im_beta_slope_sign > 0.0)) f.sampled_monotone = false;
  }
  if (const auto* pb = std::get_if<PeriodicBase>(&prof.base)) {
    const auto orbit = compute_orbit(pb->spec);
    f.theta_drift = std::accumulate(orbit.gamma.begin(), orbit.gamma.end(), 0.0);
    f.infinite_oscillation = std::abs(f.theta_drift) > 1e-12;
  }
  return f;
}

AngleRange angle_range(const TranslatorProfile& profile) {
  const auto* e = std::get_if<ExpanderProfile>(&profile.base);
  if (!e) throw ValidationError("angle range is defined for the explicit family only");
  AngleRange r;
  r.phibar_sum = asymptotic_angles(*e).sum();
  const double psum = std::accumulate(e->psi.begin(), e->psi.end(), 0.0);
  r.lo = psum + r.phibar_sum;
  r.hi = psum + pi - r.phibar_sum;
  r.oscillation = r.hi - r.lo;
  return r;
}

double asymptotic_ratio(const TranslatorCurve& curve, const std::vector<double>& x, double y) {
  const auto* e = std::get_if<ExpanderProfile>(&curve.profile().base);
  if (!e) throw ValidationError("asymptotic planes are defined for the explicit family only");
  if (y == 0.0) throw ValidationError("asymptotic ratio needs y != 0");
  const auto phibar = asymptotic_angles(*e).phibar;
  const auto z = immerse(curve, x, y).z;
  const double sgn = y > 0 ? 1.0 : -1.0;
  double d2 = 0.0;
  for (std::size_t j = 0; j < phibar.size(); ++j) {
    const double ang = e->psi[j] + sgn * phibar[j];
    d2 += std::pow((z[j] * std::polar(1.0, -ang)).imag(), 2);
  }
  d2 += std::pow(z.back().imag(), 2);
  return std::sqrt(d2) / std::abs(y);
}

}  // namespace lagsol
