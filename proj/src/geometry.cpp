#include "lagsol/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "lagsol/errors.hpp"
#include "lagsol/io.hpp"

namespace lagsol {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

CVec times_i(const CVec& v) {
  CVec out(v.size());
  for (std::size_t l = 0; l < v.size(); ++l) out[l] = I * v[l];
  return out;
}

Eigen::VectorXd to_real(const CVec& z) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(2 * z.size()));
  for (std::size_t l = 0; l < z.size(); ++l) {
    r[2 * l] = z[l].real();
    r[2 * l + 1] = z[l].imag();
  }
  return r;
}

CVec to_complex(const Eigen::VectorXd& r) {
  CVec z(static_cast<std::size_t>(r.size() / 2));
  for (std::size_t l = 0; l < z.size(); ++l) z[l] = {r[2 * l], r[2 * l + 1]};
  return z;
}

void check_x(const Curve& curve, const std::vector<double>& x) {
  if (x.size() != curve.params().n()) {
    throw ValidationError("quadric point has " + std::to_string(x.size()) + " coordinates, expected " +
                          std::to_string(curve.params().n()));
  }
}

}  // namespace

double inner(const CVec& u, const CVec& v) {
  double s = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l) s += (u[l] * std::conj(v[l])).real();
  return s;
}

double omega(const CVec& u, const CVec& v) { return inner(u, times_i(v)); }

double norm(const CVec& v) { return std::sqrt(inner(v, v)); }

CVec axpy(double a, const CVec& x, const CVec& y) {
  CVec out(y);
  for (std::size_t l = 0; l < y.size(); ++l) out[l] += a * x[l];
  return out;
}

AmbientPoint immerse(const CurvePoint& cp, const Curve& curve, const std::vector<double>& x) {
  check_x(curve, x);
  AmbientPoint pt;
  pt.x = x;
  pt.p = cp.p;
  const auto& lam = curve.params().lambdas;
  for (std::size_t l = 0; l < x.size(); ++l) pt.z.push_back(x[l] * cp.w[l]);
  if (curve.is_translator()) {
    double q = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) q += lam[l] * x[l] * x[l];
    pt.z.push_back(-0.5 * q + cp.beta);
  }
  return pt;
}

AmbientPoint immerse(const Curve& curve, const std::vector<double>& x, double p) {
  return immerse(curve.point(p), curve, x);
}

Eigen::MatrixXd quadric_basis(const std::vector<double>& lambdas, const std::vector<double>& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = lambdas[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  const double nv = v.norm();
  if (!(nv > 0.0)) throw ValidationError("degenerate quadric point: every lambda_j x_j vanishes");
  Eigen::MatrixXd E(n, n);
  E.col(n - 1) = v / nv;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(v[a]) < std::abs(v[b]); });
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, order[static_cast<std::size_t>(k)]);
    for (int pass = 0; pass < 2; ++pass) {
      e -= E.col(n - 1).dot(e) * E.col(n - 1);
      for (Eigen::Index m = 0; m < k; ++m) e -= E.col(m).dot(e) * E.col(m);
    }
    E.col(k) = e.normalized();
  }
  if (n >= 2 && E.determinant() < 0.0) E.col(0) *= -1.0;
  return E;
}

Frame frame_at(const CurvePoint& cp, const Curve& curve, const std::vector<double>& x) {
  check_x(curve, x);
  const std::size_t k = x.size();
  const auto& lam = curve.params().lambdas;
  Frame fr;
  fr.theta = cp.theta;
  CVec dw_ds(k);
  for (std::size_t l = 0; l < k; ++l) dw_ds[l] = cp.dw[l] / cp.ds_dp;
  if (curve.is_translator()) {
    for (std::size_t a = 0; a < k; ++a) {
      CVec f(k + 1, 0.0);
      f[a] = cp.w[a];
      f[k] = -lam[a] * x[a];
      fr.f.push_back(std::move(f));
    }
    CVec fn(k + 1);
    for (std::size_t l = 0; l < k; ++l) fn[l] = x[l] * dw_ds[l];
    fn[k] = cp.dbeta / cp.ds_dp;
    fr.f.push_back(std::move(fn));
  } else {
    const Eigen::MatrixXd E = quadric_basis(lam, x);
    for (std::size_t a = 0; a + 1 < k; ++a) {
      CVec f(k);
      for (std::size_t l = 0; l < k; ++l) f[l] = E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(a)) * cp.w[l];
      fr.f.push_back(std::move(f));
    }
    CVec fn(k);
    for (std::size_t l = 0; l < k; ++l) fn[l] = x[l] * dw_ds[l];
    fr.f.push_back(std::move(fn));
  }
  const auto d = static_cast<Eigen::Index>(fr.f.size());
  fr.g.resize(d, d);
  Eigen::MatrixXcd M(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      fr.g(a, b) = inner(fr.f[static_cast<std::size_t>(a)], fr.f[static_cast<std::size_t>(b)]);
      M(a, b) = fr.f[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
    }
  }
  fr.det_f = M.determinant();
  return fr;
}

Frame frame_at(const Curve& curve, const std::vector<double>& x, double p) {
  return frame_at(curve.point(p), curve, x);
}

double lagrangian_residual(const Frame& fr) {
  double worst = 0.0;
  for (std::size_t a = 0; a < fr.f.size(); ++a) {
    for (std::size_t b = a + 1; b < fr.f.size(); ++b) {
      const double s = norm(fr.f[a]) * norm(fr.f[b]);
      worst = std::max(worst, std::abs(omega(fr.f[a], fr.f[b])) / s);
    }
  }
  return worst;
}

double lagrangian_angle_residual(const Frame& fr) {
  return std::abs(std::remainder(std::arg(fr.det_f) - fr.theta, 2.0 * std::numbers::pi));
}

double lagrangian_angle_residual(const Curve& curve, const std::vector<double>& x, double p) {
  return lagrangian_angle_residual(frame_at(curve, x, p));
}

CVec normal_projection(const Frame& fr, const CVec& v) {
  const auto d = static_cast<Eigen::Index>(fr.f.size());
  Eigen::VectorXd c(d);
  std::vector<CVec> jf;
  for (Eigen::Index k = 0; k < d; ++k) {
    jf.push_back(times_i(fr.f[static_cast<std::size_t>(k)]));
    c[k] = inner(v, jf.back());
  }
  const Eigen::VectorXd y = fr.g.ldlt().solve(c);
  CVec out(v.size(), 0.0);
  for (Eigen::Index k = 0; k < d; ++k) out = axpy(y[k], jf[static_cast<std::size_t>(k)], out);
  return out;
}

NormalF normal_projection_F(const Curve& curve, const std::vector<double>& x, double p) {
  const auto cp = curve.point(p);
  const auto fr = frame_at(cp, curve, x);
  const auto F = immerse(cp, curve, x).z;
  NormalF out;
  out.projected = normal_projection(fr, F);
  const double nF = std::max(norm(F), 1e-300);
  for (std::size_t l = 0; l + 1 < fr.f.size(); ++l) {
    out.tangential_check =
        std::max(out.tangential_check, std::abs(inner(F, times_i(fr.f[l]))) / (nF * norm(fr.f[l])));
  }
  if (!curve.is_translator()) {
    const auto& lam = curve.params().lambdas;
    double C = 0.0;
    cd prod = 1.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
      C += lam[l] * x[l] * x[l];
      prod *= cp.w[l];
    }
    const double rsin = (std::polar(1.0, -cp.theta) * prod).imag();
    const std::size_t n = fr.f.size();
    const double gnn = fr.g(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1));
    CVec cf = times_i(fr.f.back());
    for (auto& c : cf) c *= C * rsin / gnn;
    out.closed_form = std::move(cf);
  }
  return out;
}

CVec mean_curvature_formula(const Frame& fr, const CurvePoint& cp, const Curve& curve) {
  cd prod = 1.0;
  for (const auto& w : cp.w) prod *= w;
  const double dtheta = curve.params().alpha * (std::polar(1.0, -cp.theta) * prod).imag();
  const std::size_t n = fr.f.size();
  const double gnn = fr.g(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1));
  CVec h = times_i(fr.f.back());
  for (auto& c : h) c *= dtheta / gnn;
  return h;
}

CVec mean_curvature_fd(const Curve& curve, const std::vector<double>& x0, double p, double h) {
  check_x(curve, x0);
  const std::size_t k = x0.size();
  const auto& lam = curve.params().lambdas;
  const bool trans = curve.is_translator();
  const std::size_t nt = trans ? k : k - 1;  // chart directions besides p
  const std::size_t d = nt + 1;

  if (!(h > 0.0)) {
    const auto cp0 = curve.point(p);
    double wmax = 0.0;
    for (const auto& w : cp0.w) wmax = std::max(wmax, std::norm(w));
    h = 1e-3 * std::sqrt(1.0 + wmax);
  }
  const std::vector<double> ps{p - h, p - h / 2, p, p + h / 2, p + h};
  const auto cps = curve.points(ps);

  Eigen::MatrixXd E;
  double C = 0.0, A2 = 0.0;
  if (!trans) {
    E = quadric_basis(lam, x0);
    for (std::size_t l = 0; l < k; ++l) {
      C += lam[l] * x0[l] * x0[l];
      A2 += lam[l] * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k - 1)) *
            E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k - 1));
    }
  }
  // Chart: t -> point of the quadric, pushing x0 + sum t_a e_a back along e_n.
  auto chart = [&](const Eigen::VectorXd& t) {
    std::vector<double> x(x0);
    if (trans) {
      for (std::size_t a = 0; a < k; ++a) x[a] += t[static_cast<Eigen::Index>(a)];
      return x;
    }
    for (std::size_t a = 0; a < nt; ++a) {
      for (std::size_t l = 0; l < k; ++l) x[l] += t[static_cast<Eigen::Index>(a)] * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(a));
    }
    double B = 0.0, D = -C;
    for (std::size_t l = 0; l < k; ++l) {
      B += 2.0 * lam[l] * x[l] * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k - 1));
      D += lam[l] * x[l] * x[l];
    }
    const double disc = B * B - 4.0 * A2 * D;
    if (disc < 0.0) throw NumericalError("finite-difference stencil left the quadric chart");
    const double c = -2.0 * D / (B + std::copysign(std::sqrt(disc), B));
    for (std::size_t l = 0; l < k; ++l) x[l] += c * E(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k - 1));
    return x;
  };
  // X at chart offset t and curve sample index pi (into ps).
  auto X = [&](const Eigen::VectorXd& t, std::size_t pidx) {
    return to_real(immerse(cps[pidx], curve, chart(t)).z);
  };

  const auto D = static_cast<Eigen::Index>(d);
  struct Derivs {
    std::vector<Eigen::VectorXd> first;
    std::vector<std::vector<Eigen::VectorXd>> second;
  };
  auto stencil = [&](int m) {  // step m * h/2, m in {1, 2}
    const double sig = m * h / 2;
    Derivs r;
    r.first.resize(d);
    r.second.assign(d, std::vector<Eigen::VectorXd>(d));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nt));
    const auto X0 = X(zero, 2);
    // offset in direction a by s in {-1,0,1}: returns (t, pidx)
    auto shift = [&](Eigen::VectorXd& t, std::size_t& pidx, std::size_t a, int s) {
      if (a < nt) t[static_cast<Eigen::Index>(a)] += s * sig;
      else pidx = static_cast<std::size_t>(static_cast<int>(pidx) + s * m);
    };
    auto Xs = [&](std::size_t a, int sa, std::size_t b, int sb) {
      Eigen::VectorXd t = zero;
      std::size_t pidx = 2;
      shift(t, pidx, a, sa);
      if (sb != 0) shift(t, pidx, b, sb);
      return X(t, pidx);
    };
    for (std::size_t a = 0; a < d; ++a) {
      const auto Xp = Xs(a, 1, a, 0), Xm = Xs(a, -1, a, 0);
      r.first[a] = (Xp - Xm) / (2 * sig);
      r.second[a][a] = (Xp - 2 * X0 + Xm) / (sig * sig);
      for (std::size_t b = 0; b < a; ++b) {
        const Eigen::VectorXd v = (Xs(a, 1, b, 1) - Xs(a, 1, b, -1) - Xs(a, -1, b, 1) + Xs(a, -1, b, -1)) / (4 * sig * sig);
        r.second[a][b] = v;
        r.second[b][a] = v;
      }
    }
    return r;
  };
  const auto coarse = stencil(2), fine = stencil(1);
  std::vector<Eigen::VectorXd> Xa(d);
  std::vector<std::vector<Eigen::VectorXd>> Xab(d, std::vector<Eigen::VectorXd>(d));
  for (std::size_t a = 0; a < d; ++a) {
    Xa[a] = (4.0 * fine.first[a] - coarse.first[a]) / 3.0;
    for (std::size_t b = 0; b < d; ++b) Xab[a][b] = (4.0 * fine.second[a][b] - coarse.second[a][b]) / 3.0;
  }
  Eigen::MatrixXd T(Xa[0].size(), D);
  for (std::size_t a = 0; a < d; ++a) T.col(static_cast<Eigen::Index>(a)) = Xa[a];
  const Eigen::MatrixXd G = T.transpose() * T;
  const Eigen::MatrixXd Ginv = G.inverse();
  Eigen::VectorXd H = Eigen::VectorXd::Zero(T.rows());
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      const Eigen::VectorXd& v = Xab[a][b];
      const Eigen::VectorXd perp = v - T * (Ginv * (T.transpose() * v));
      H += Ginv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * perp;
    }
  }
  return to_complex(H);
}

CVec translator_T_perp(const Frame& fr, double alpha) {
  CVec T(fr.f.front().size(), 0.0);
  T.back() = alpha;
  return normal_projection(fr, T);
}

MaslovFit maslov_angle_check(const Curve& curve,
                             const std::vector<std::pair<std::vector<double>, double>>& samples) {
  MaslovFit fit;
  if (samples.empty()) return fit;
  std::vector<double> ps;
  for (const auto& s : samples) ps.push_back(s.second);
  const auto cps = curve.points(ps);
  const double alpha = curve.params().alpha;
  std::vector<double> vals;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto pt = immerse(cps[i], curve, samples[i].first);
    vals.push_back(cps[i].theta + alpha * pt.z.back().imag());
  }
  fit.c = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  for (double v : vals) fit.max_residual = std::max(fit.max_residual, std::abs(v - fit.c));
  return fit;
}

ResidualReport residual_report(const Curve& curve,
                               const std::vector<std::pair<std::vector<double>, double>>& samples,
                               bool with_soliton) {
  ResidualReport rep;
  std::vector<double> ps;
  for (const auto& s : samples) ps.push_back(s.second);
  const auto cps = curve.points(ps);
  const double alpha = curve.params().alpha;
  const auto& lam = curve.params().lambdas;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i].first;
    const auto fr = frame_at(cps[i], curve, x);
    ResidualRow row;
    row.point_id = i;
    row.p = ps[i];
    row.lagrangian = lagrangian_residual(fr);
    row.angle = lagrangian_angle_residual(fr);
    if (with_soliton) {
      const auto H = mean_curvature_fd(curve, x, ps[i]);
      row.h_norm = norm(H);
      if (alpha == 0.0) {
        row.soliton = row.h_norm;
      } else if (curve.is_translator()) {
        const auto Tp = translator_T_perp(fr, alpha);
        row.soliton = norm(axpy(-1.0, Tp, H)) / std::max({row.h_norm, norm(Tp), 1e-300});
      } else {
        double C = 0.0;
        for (std::size_t l = 0; l < x.size(); ++l) C += lam[l] * x[l] * x[l];
        const auto Fp = normal_projection(fr, immerse(cps[i], curve, x).z);
        CVec lhs = Fp;
        for (auto& c : lhs) c *= alpha;
        row.soliton = norm(axpy(-C, H, lhs)) / std::max(row.h_norm, 1e-300);
      }
    }
    rep.max_lagrangian = std::max(rep.max_lagrangian, row.lagrangian);
    rep.max_angle = std::max(rep.max_angle, row.angle);
    rep.max_soliton = std::max(rep.max_soliton, row.soliton);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_residual_csv(std::ostream& out, const ResidualReport& report) {
  io::write_header(out, {"point_id", "s_or_y", "lagrangian_residual", "angle_residual", "soliton_residual"});
  for (const auto& r : report.rows) {
    io::write_row(out, {static_cast<double>(r.point_id), r.p, r.lagrangian, r.angle, r.soliton});
  }
}

std::vector<std::vector<double>> sample_quadric(const std::vector<double>& lambdas, double C,
                                                std::size_t count, double rho_max, std::uint64_t seed) {
  const std::size_t n = lambdas.size();
  std::size_t m = 0;
  for (double l : lambdas) {
    if (l != 1.0 && l != -1.0) throw ValidationError("sample_quadric needs lambda_j = +-1");
    if (l > 0) ++m;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if ((j < m) != (lambdas[j] > 0)) throw ValidationError("sample_quadric needs positives first");
  }
  std::size_t big = m, small = n - m;  // sphere carrying cosh, sphere carrying sinh
  if (C < 0) std::swap(big, small);
  if (C != 0.0 && big == 0) throw ValidationError("quadric is empty for this sign of C");
  if (C == 0.0 && (m == 0 || m == n)) throw ValidationError("cone is only the origin");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, rho_max);
  auto sphere = [&](std::size_t dim) {
    std::vector<double> v(dim);
    if (dim == 0) return v;
    double s = 0.0;
    do {
      s = 0.0;
      for (auto& c : v) {
        c = gauss(rng);
        s += c * c;
      }
    } while (s < 1e-20);
    for (auto& c : v) c /= std::sqrt(s);
    return v;
  };
  const double scale = std::sqrt(std::abs(C));
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < count; ++i) {
    // definite case: the second sphere is empty, only rho = 0 lies on the quadric
    const double rho = (m == 0 || m == n) ? 0.0 : unif(rng);
    auto wp = sphere(m);
    auto wm = sphere(n - m);
    if (n == 1) wp[0] = std::abs(wp.empty() ? 1.0 : wp[0]), wm.assign(wm.size(), -1.0);
    double cp = 0.0, cm = 0.0;
    if (C > 0) {
      cp = scale * std::cosh(rho);
      cm = scale * std::sinh(rho);
    } else if (C < 0) {
      cp = scale * std::sinh(rho);
      cm = scale * std::cosh(rho);
    } else {
      cp = cm = rho;
    }
    std::vector<double> x(n);
    for (std::size_t j = 0; j < m; ++j) x[j] = cp * wp[j];
    for (std::size_t j = m; j < n; ++j) x[j] = cm * wm[j - m];
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace lagsol
