#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "lagsol/errors.hpp"
#include "lagsol/expander.hpp"
#include "lagsol/geometry.hpp"
#include "lagsol/io.hpp"
#include "lagsol/reduced_ode.hpp"
#include "lagsol/translator.hpp"
#include "report.hpp"

namespace cli {

using namespace lagsol;

std::filesystem::path prepare_dir(const Common& c) {
  const auto dir = output_dir(c);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

std::optional<std::vector<std::vector<double>>> parse_projection(const std::string& spec, std::size_t n) {
  if (spec.empty()) return std::nullopt;
  const auto rows = io::split(spec, ';');
  if (rows.size() != 3) throw ValidationError("--projection needs three ';'-separated rows");
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) {
    auto v = io::parse_row(r);
    if (v.size() != 2 * n)
      throw ValidationError("--projection rows need " + std::to_string(2 * n) + " entries, got " + std::to_string(v.size()));
    out.push_back(std::move(v));
  }
  return out;
}

void write_mesh(const std::filesystem::path& dir, const std::string& stem, const Common& c,
                const std::vector<io::MeshVertex>& vertices) {
  std::ostringstream csv;
  io::write_mesh_csv(csv, vertices);
  write_file(dir / (stem + ".csv"), csv.str());
  if (c.no_ply) return;
  const std::size_t n = vertices.empty() ? 0 : vertices.front().z.size();
  const auto proj = parse_projection(c.projection, n);
  std::ostringstream ply;
  io::write_ply(ply, vertices, proj ? &*proj : nullptr);
  write_file(dir / (stem + ".ply"), ply.str());
}

Samples strided(const Samples& all, std::size_t count) {
  if (all.size() <= count) return all;
  Samples out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(all[k * (all.size() - 1) / (count - 1)]);
  return out;
}

std::vector<io::MeshVertex> mesh_vertices(const Curve& curve, const std::vector<CurvePoint>& cps,
                                          const std::vector<std::vector<double>>& xs, Samples* samples) {
  std::vector<io::MeshVertex> out;
  for (const auto& cp : cps) {
    for (const auto& x : xs) {
      io::MeshVertex v;
      v.z = immerse(cp, curve, x).z;
      v.param = cp.p;
      v.theta = cp.theta;
      out.push_back(std::move(v));
      if (samples) samples->emplace_back(x, cp.p);
    }
  }
  return out;
}

void frame_checks(Report& rep, const Curve& curve, const Samples& all, const Tolerances& t) {
  const auto r = residual_report(curve, all, false);
  rep.check("lagrangian condition", r.max_lagrangian, t.lag);
  rep.check("angle identity", r.max_angle, t.angle);
}

void soliton_checks(Report& rep, const Curve& curve, const Samples& all, const Tolerances& t) {
  const auto sub = strided(all, t.check_points);
  const auto r = residual_report(curve, sub, true);
  if (curve.params().alpha == 0.0) {
    double hmax = 0.0;
    for (const auto& row : r.rows) hmax = std::max(hmax, row.h_norm);
    rep.check("special Lagrangian |H|", hmax, t.sl);
  } else {
    rep.check("soliton equation", r.max_soliton, t.soliton);
  }
}

std::vector<std::vector<double>> translator_xs(std::size_t k, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xd(-1.0, 1.0);
  std::vector<std::vector<double>> out(count, std::vector<double>(k));
  for (auto& x : out)
    for (auto& v : x) v = xd(rng);
  return out;
}

ExpanderProfile build_expander(const ExpanderOpts& o) {
  if (o.n && *o.n != o.a.size())
    throw ValidationError("--n is " + std::to_string(*o.n) + " but --a has " + std::to_string(o.a.size()) + " entries");
  ExpanderProfile p;
  p.alpha = o.alpha;
  p.a = o.a;
  p.psi = o.psi.empty() ? std::vector<double>(o.a.size(), 0.0) : o.psi;
  validate(p);
  return p;
}

PeriodicSpec build_periodic_spec(const OrbitOpts& o, bool shrinker) {
  SolitonParams p;
  p.lambdas = shrinker ? std::vector<double>(o.alphas.size(), 1.0) : o.lambdas;
  p.C = 1.0;
  p.alpha = o.alpha;
  if (shrinker && !(o.alpha < 0.0)) throw ValidationError("shrinker needs alpha < 0");
  if (p.lambdas.size() != o.alphas.size())
    throw ValidationError("--lambdas and --alphas differ in length");
  if (!p.is_normalized()) throw ValidationError("lambdas must be +1 or -1 with the positive ones first");
  if (!o.A && !o.A_frac) throw ValidationError("give --A or --A-frac");
  if (!o.psi.empty() && o.psi.size() != o.alphas.size()) throw ValidationError("--psi has the wrong length");
  auto spec = make_periodic_spec(p, o.alphas, o.A.value_or(1.0));
  if (o.A_frac) {
    if (!(*o.A_frac > 0.0 && *o.A_frac <= 1.0)) throw ValidationError("--A-frac must lie in (0, 1]");
    spec.A = *o.A_frac * std::exp(0.5 * spec.log_G0());
  }
  validate(spec);
  return spec;
}

std::shared_ptr<const Curve> orbit_curve(const PeriodicSpec& spec, const std::vector<double>& psi, double s_max) {
  if (classify_case(spec) == CaseTag::i) return std::make_shared<HamiltonianStationary>(spec, psi);
  return std::make_shared<OdeCurve>(trajectory_spec(spec, psi), 0.0, s_max);
}

double mesh_period(const PeriodicOrbit& orbit, const Periodicity& per) { return per.periodic ? per.T : orbit.S; }

ReducedTrajectory orbit_profile(const PeriodicSpec& spec, const std::vector<double>& psi,
                                std::span<const double> grid) {
  if (classify_case(spec) == CaseTag::i) {
    HamiltonianStationary h(spec, psi);
    ReducedTrajectory tr;
    tr.A = spec.A;
    for (double s : grid) tr.samples.push_back(h.state(s));
    return tr;
  }
  IntegrationOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  return integrate_reduced(trajectory_spec(spec, psi), grid, opt);
}

TranslatorProfile build_translator(const TranslatorOpts& o) {
  if (o.a.empty() == o.alphas.empty())
    throw ValidationError("give either --a (explicit base) or --alphas (periodic base)");
  TranslatorProfile prof;
  if (!o.a.empty()) {
    if (!o.lambdas.empty() || o.A || o.A_frac || !o.psi.empty())
      throw ValidationError("--lambdas, --A, --A-frac and --psi belong to the periodic base");
    prof = corollary_I_profile(o.alpha, o.a);
  } else {
    OrbitOpts b;
    b.lambdas = o.lambdas;
    b.alpha = o.alpha;
    b.alphas = o.alphas;
    b.A = o.A;
    b.A_frac = o.A_frac;
    b.psi = o.psi;
    prof = periodic_translator(build_periodic_spec(b, false), o.psi);
  }
  if (!o.K.empty()) {
    if (o.K.size() != 2) throw ValidationError("--K takes two numbers: re,im");
    prof.K = {o.K[0], o.K[1]};
  }
  validate(prof);
  return prof;
}

namespace {

std::string join(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::fmt(v[i]);
  return s;
}

std::string join(const std::vector<long>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void orbit_lines(Report& rep, const PeriodicOrbit& orbit, const Periodicity& per) {
  rep.line("u1", io::fmt(orbit.u1));
  rep.line("u2", io::fmt(orbit.u2));
  rep.line("S", io::fmt(orbit.S));
  rep.line("gamma", join(orbit.gamma));
  rep.line("case", to_string(orbit.case_tag));
  rep.line("periodic", per.periodic ? "yes" : "no");
  if (per.periodic) {
    rep.line("r", std::to_string(per.r));
    rep.line("p", join(per.p));
    if (orbit.case_tag == CaseTag::i) rep.line("mu", io::fmt(per.mu));
    rep.line("T", io::fmt(per.T));
    rep.line("topology", per.topology);
  } else {
    rep.line("topology", "quasi-periodic");
  }
  if (orbit.warning) rep.line("warning", *orbit.warning);
}

int finish(Report& rep, const std::filesystem::path& dir, const CLI::App& sub) {
  write_file(dir / "config.txt", resolved_config(sub));
  write_file(dir / "summary.txt", rep.text());
  std::cout << rep.text();
  return rep.ok() ? kOk : kVerification;
}

}  // namespace

int cmd_expander(const CLI::App& sub, const Common& c, const Tolerances& t, const ExpanderOpts& o) {
  const auto prof = build_expander(o);
  const auto dir = prepare_dir(c);
  ExpanderCurve curve(prof);
  const auto ys = linspace(-o.y_max, o.y_max, o.samples);
  const auto vals = profile_eval(prof, ys);
  {
    std::ostringstream out;
    write_profile_csv(out, vals);
    write_file(dir / "profile.csv", out.str());
  }
  const auto cps = curve.points(ys);
  const auto xs = sample_quadric(std::vector<double>(prof.n(), 1.0), 1.0, o.xsamples, 0.0, o.seed);
  Samples all;
  const auto verts = mesh_vertices(curve, cps, xs, &all);
  write_mesh(dir, "mesh", c, verts);

  const auto planes = plane_report(prof);
  {
    std::ostringstream out;
    out << "L1=" << join(planes.L1) << "\nL2=" << join(planes.L2) << "\nphibar_sum=" << io::fmt(planes.sum) << '\n';
    write_file(dir / "planes.txt", out.str());
  }

  Report rep("expander");
  rep.line("n", std::to_string(prof.n()));
  rep.line("alpha", io::fmt(prof.alpha));
  rep.line("points", std::to_string(verts.size()));
  rep.line("L1", join(planes.L1));
  rep.line("L2", join(planes.L2));
  rep.line("phibar_sum", io::fmt(planes.sum));
  if (prof.alpha == 0.0) {
    double drift = 0.0;
    for (const auto& v : vals) drift = std::max(drift, std::abs(v.theta - vals.front().theta));
    rep.line("theta_constant", drift < 1e-12 ? "yes" : "no");
    rep.check("constant angle", drift, 1e-12);
  }
  frame_checks(rep, curve, all, t);
  soliton_checks(rep, curve, all, t);
  return finish(rep, dir, sub);
}

int cmd_periodic(const CLI::App& sub, const Common& c, const Tolerances& t, const OrbitOpts& o, bool shrinker) {
  const auto spec = build_periodic_spec(o, shrinker);
  const auto psi = o.psi.empty() ? std::vector<double>(spec.n(), 0.0) : o.psi;
  const auto dir = prepare_dir(c);
  const auto orbit = compute_orbit(spec);
  const auto per = detect_periodicity(spec, orbit, o.ptol, o.qmax);
  {
    std::ostringstream out;
    write_orbit_csv(out, orbit, per);
    write_file(dir / "orbit.csv", out.str());
  }
  Report rep(shrinker ? "shrinker" : "periodic");
  rep.line("n", std::to_string(spec.n()));
  rep.line("alpha", io::fmt(spec.params.alpha));
  rep.line("alphas", join(spec.alphas));
  rep.line("A", io::fmt(spec.A));
  orbit_lines(rep, orbit, per);

  const double T = mesh_period(orbit, per);
  const auto grid = linspace(0.0, T, o.samples);
  const auto tspec = trajectory_spec(spec, psi);
  const auto traj = orbit_profile(spec, psi, grid);
  {
    std::ostringstream out;
    write_trajectory_csv(out, tspec, traj);
    write_file(dir / "profile.csv", out.str());
  }
  double drift = 0.0;
  for (const auto& st : traj.samples) drift = std::max(drift, std::abs(first_integral(tspec, st) - spec.A));
  rep.check("first integral", drift / std::abs(spec.A), t.integral);

  if (o.mesh && per.periodic) {
    const auto curve = orbit_curve(spec, psi, T);
    const auto cps = curve->points(grid);
    const auto xs = sample_quadric(spec.params.lambdas, 1.0, o.xsamples, o.rho_max, o.seed);
    Samples all;
    const auto verts = mesh_vertices(*curve, cps, xs, &all);
    write_mesh(dir, "mesh", c, verts);
    rep.line("points", std::to_string(verts.size()));
    double gap = 0.0, wmax = 0.0;
    for (std::size_t j = 0; j < spec.n(); ++j) {
      gap = std::max(gap, std::abs(cps.back().w[j] - cps.front().w[j]));
      wmax = std::max(wmax, std::abs(cps.front().w[j]));
    }
    rep.check("closure after T", gap / wmax, 1e-6);
    frame_checks(rep, *curve, all, t);
    soliton_checks(rep, *curve, all, t);
  } else if (o.mesh) {
    rep.line("mesh", "skipped: orbit is not periodic");
  }
  return finish(rep, dir, sub);
}

int cmd_search(const CLI::App& sub, const Common& c, const SearchOpts& o) {
  SolitonParams p;
  p.lambdas = o.lambdas;
  p.alpha = o.alpha;
  if (p.lambdas.size() != o.target.size()) throw ValidationError("--lambdas and --target differ in length");
  if (!p.is_normalized()) throw ValidationError("lambdas must be +1 or -1 with the positive ones first");
  SearchOptions so;
  so.tol = o.tol;
  so.max_iter = o.max_iter;
  const auto dir = prepare_dir(c);
  const auto res = periodic_search(p, o.target, std::nullopt, so);
  const auto orbit = compute_orbit(res.spec);
  const auto per = detect_periodicity(res.spec, orbit);
  {
    std::ostringstream out;
    write_orbit_csv(out, orbit, per);
    write_file(dir / "orbit.csv", out.str());
  }
  Report rep("periodic-search");
  rep.line("alphas", join(res.spec.alphas));
  rep.line("A", io::fmt(res.spec.A));
  rep.line("iterations", std::to_string(res.iterations));
  rep.check("holonomy residual", res.residual, o.tol);
  orbit_lines(rep, orbit, per);
  return finish(rep, dir, sub);
}

int cmd_translator(const CLI::App& sub, const Common& c, const Tolerances& t, const TranslatorOpts& o) {
  const auto prof = build_translator(o);
  const auto dir = prepare_dir(c);
  TranslatorCurve curve(prof, -o.p_max, o.p_max);
  const auto ps = linspace(-o.p_max, o.p_max, o.samples);
  const auto cps = curve.points(ps);
  {
    std::ostringstream out;
    io::write_header(out, {"p", "re_beta", "im_beta", "theta"});
    for (const auto& cp : cps) io::write_row(out, {cp.p, cp.beta.real(), cp.beta.imag(), cp.theta});
    write_file(dir / "profile.csv", out.str());
  }
  const auto xs = translator_xs(prof.n() - 1, o.xsamples, o.seed);
  Samples all;
  const auto verts = mesh_vertices(curve, cps, xs, &all);
  write_mesh(dir, "mesh", c, verts);

  Report rep("translator");
  rep.line("n", std::to_string(prof.n()));
  rep.line("alpha", io::fmt(prof.alpha));
  rep.line("base", prof.explicit_base() ? "explicit" : "periodic");
  rep.line("A", io::fmt(prof.A));
  rep.line("K", io::fmt(prof.K.real()) + "," + io::fmt(prof.K.imag()));
  rep.line("points", std::to_string(verts.size()));
  const auto flags = translator_flags(curve, ps);
  rep.line("injective", flags.injective ? "yes" : "no");
  rep.check("Im beta monotone", flags.sampled_monotone ? 0.0 : 1.0, 0.5);
  if (prof.explicit_base()) {
    const auto r = angle_range(prof);
    rep.line("phibar_sum", io::fmt(r.phibar_sum));
    rep.line("theta_range", io::fmt(r.lo) + "," + io::fmt(r.hi));
    rep.line("angle_oscillation", io::fmt(r.oscillation));
  } else {
    rep.line("theta_drift_per_period", io::fmt(flags.theta_drift));
    rep.line("infinite_oscillation", flags.infinite_oscillation ? "yes" : "no");
  }
  frame_checks(rep, curve, all, t);
  soliton_checks(rep, curve, all, t);
  if (prof.alpha != 0.0) {
    const auto fit = maslov_angle_check(curve, all);
    const double want = prof.alpha * prof.K.imag();
    rep.line("maslov_c", io::fmt(fit.c));
    rep.check("angle-height identity", std::abs(fit.c - want) + fit.max_residual, 1e-8);
  }
  return finish(rep, dir, sub);
}

int cmd_invert(const CLI::App& sub, const Common& c, const InvertOpts& o) {
  InversionOptions io_opt;
  io_opt.tol = o.tol;
  const auto res = invert_angle_map(o.alpha, AngleVector{o.target}, io_opt);
  const auto dir = prepare_dir(c);
  Report rep("invert-angles");
  rep.line("alpha", io::fmt(o.alpha));
  rep.line("target", join(o.target));
  rep.line("a", join(res.a));
  rep.line("achieved", join(res.achieved.phibar));
  rep.line("iterations", std::to_string(res.iterations));
  rep.check("angle residual", res.residual, o.tol);
  return finish(rep, dir, sub);
}

int cmd_flow(const CLI::App& sub, const Common& c, const FlowOpts& o) {
  const auto spec = build_periodic_spec(o.orbit, false);
  const std::size_t m = spec.params.m(), n = spec.n();
  if (m == 0 || m == n) throw ValidationError("flow-family needs mixed signs: 1 <= m < n");
  const auto psi = o.orbit.psi.empty() ? std::vector<double>(n, 0.0) : o.orbit.psi;
  const auto dir = prepare_dir(c);
  const auto orbit = compute_orbit(spec);
  const auto per = detect_periodicity(spec, orbit, o.orbit.ptol, o.orbit.qmax);
  Report rep("flow-family");
  orbit_lines(rep, orbit, per);
  if (!per.periodic) rep.line("warning", "orbit is not periodic; members are not closed");
  const double T = mesh_period(orbit, per);
  const auto curve = orbit_curve(spec, psi, T);
  const auto cps = curve->points(linspace(0.0, T, o.orbit.samples));
  Tolerances tol;
  for (std::size_t k = 0; k < o.ts.size(); ++k) {
    const auto member = brakke_member(spec.params, o.ts[k]);
    const auto xs = sample_quadric(spec.params.lambdas, o.ts[k], o.orbit.xsamples, o.orbit.rho_max, o.orbit.seed);
    Samples all;
    const auto verts = mesh_vertices(*curve, cps, xs, &all);
    const std::string stem = "mesh_t" + std::to_string(k + 1);
    write_mesh(dir, stem, c, verts);
    rep.line(stem, "t=" + io::fmt(member.t) + " topology=" + member.topology +
                       " singular_at_origin=" + (member.singular_at_origin ? "yes" : "no"));
    const auto r = residual_report(*curve, all, false);
    rep.check(stem + " lagrangian condition", r.max_lagrangian, tol.lag);
  }
  return finish(rep, dir, sub);
}

}  // namespace cli
