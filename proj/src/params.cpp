#include "lagsol/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lagsol/errors.hpp"

namespace lagsol {

std::size_t SolitonParams::m() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(lambdas.begin(), lambdas.end(), [](double l) { return l > 0; }));
}

bool SolitonParams::is_normalized() const noexcept {
  if (C != 1.0) return false;
  bool seen_negative = false;
  for (double l : lambdas) {
    if (l == 1.0) {
      if (seen_negative) return false;
    } else if (l == -1.0) {
      seen_negative = true;
    } else {
      return false;
    }
  }
  return !lambdas.empty();
}

void validate(const SolitonParams& p) {
  if (p.lambdas.empty()) throw ValidationError("need at least one lambda_j (n >= 1)");
  if (p.C == 0.0 || !std::isfinite(p.C)) throw ValidationError("C must be a nonzero real");
  if (!std::isfinite(p.alpha)) throw ValidationError("alpha must be finite");
  for (std::size_t j = 0; j < p.lambdas.size(); ++j) {
    if (p.lambdas[j] == 0.0 || !std::isfinite(p.lambdas[j])) {
      throw ValidationError("lambda_" + std::to_string(j + 1) + " must be a nonzero real");
    }
  }
}

ScalingRecord ScalingRecord::identity(std::size_t n) {
  ScalingRecord r;
  r.n = n;
  r.perm.resize(n);
  std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
  r.w_factors.assign(n, 1.0);
  r.x_factors.assign(n, 1.0);
  r.alphaj_factors.assign(n, 1.0);
  return r;
}

ScalingRecord ScalingRecord::inverse() const {
  ScalingRecord r;
  r.n = n;
  r.perm.resize(n);
  r.w_factors.resize(n);
  r.x_factors.resize(n);
  r.alphaj_factors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = perm[j];
    r.perm[k] = j;
    r.w_factors[k] = 1.0 / w_factors[j];
    r.x_factors[k] = 1.0 / x_factors[j];
    r.alphaj_factors[k] = 1.0 / alphaj_factors[j];
  }
  r.s_factor = 1.0 / s_factor;
  r.u_factor = 1.0 / u_factor;
  r.A_factor = 1.0 / A_factor;
  r.alpha_factor = 1.0 / alpha_factor;
  return r;
}

ScalingRecord ScalingRecord::compose_after(const ScalingRecord& first) const {
  ScalingRecord r;
  r.n = n;
  r.perm.resize(n);
  r.w_factors.resize(n);
  r.x_factors.resize(n);
  r.alphaj_factors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = perm[j];
    r.perm[j] = first.perm[k];
    r.w_factors[j] = w_factors[j] * first.w_factors[k];
    r.x_factors[j] = x_factors[j] * first.x_factors[k];
    r.alphaj_factors[j] = alphaj_factors[j] * first.alphaj_factors[k];
  }
  r.s_factor = s_factor * first.s_factor;
  r.u_factor = u_factor * first.u_factor;
  r.A_factor = A_factor * first.A_factor;
  r.alpha_factor = alpha_factor * first.alpha_factor;
  return r;
}

namespace {
bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace

bool ScalingRecord::approx_equal(const ScalingRecord& o, double tol) const {
  if (n != o.n || perm != o.perm) return false;
  if (!close(s_factor, o.s_factor, tol) || !close(u_factor, o.u_factor, tol) ||
      !close(A_factor, o.A_factor, tol) || !close(alpha_factor, o.alpha_factor, tol)) {
    return false;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!close(w_factors[j], o.w_factors[j], tol) || !close(x_factors[j], o.x_factors[j], tol) ||
        !close(alphaj_factors[j], o.alphaj_factors[j], tol)) {
      return false;
    }
  }
  return true;
}

Normalized normalize(const SolitonParams& params) {
  validate(params);
  const std::size_t n = params.n();
  const double C = params.C;
  const double absC = std::abs(C);

  double prod_sqrt_lambda = 1.0;
  for (double l : params.lambdas) prod_sqrt_lambda *= std::sqrt(std::abs(l));

  // Signs of C lambda_j, positives first.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (C * params.lambdas[a] > 0) && !(C * params.lambdas[b] > 0);
  });

  Normalized out;
  out.params.C = 1.0;
  out.params.alpha = params.alpha / C;
  out.params.lambdas.resize(n);

  ScalingRecord& r = out.record;
  r.n = n;
  r.perm = order;
  r.w_factors.resize(n);
  r.x_factors.resize(n);
  r.alphaj_factors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double l = params.lambdas[order[j]];
    out.params.lambdas[j] = (C * l > 0) ? 1.0 : -1.0;
    r.w_factors[j] = std::sqrt(absC / std::abs(l));
    r.x_factors[j] = std::sqrt(std::abs(l) / absC);
    r.alphaj_factors[j] = absC / std::abs(l);
  }
  const double half_n = 0.5 * static_cast<double>(n);
  r.s_factor = C * std::pow(absC, -half_n) * prod_sqrt_lambda;
  r.u_factor = C;
  r.A_factor = std::pow(absC, half_n) / prod_sqrt_lambda;
  r.alpha_factor = 1.0 / C;
  return out;
}

ScalingRecord rescale_solution(const ScalingRecord& record, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("rescale factor t must be positive");
  const std::size_t n = record.n;
  ScalingRecord d = ScalingRecord::identity(n);
  const double nn = static_cast<double>(n);
  d.alpha_factor = 1.0 / (t * t);
  d.s_factor = std::pow(t, nn - 2.0);
  d.u_factor = t * t;
  d.A_factor = std::pow(t, nn);
  std::fill(d.w_factors.begin(), d.w_factors.end(), t);
  std::fill(d.alphaj_factors.begin(), d.alphaj_factors.end(), t * t);
  return d.compose_after(record);
}

}  // namespace lagsol
