#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lagsol/errors.hpp"
#include "lagsol/geometry.hpp"
#include "report.hpp"

namespace cli {

using namespace lagsol;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// Rebuilds the options of the recorded run by replaying config.txt.
std::unique_ptr<CLI::App> replay(const std::filesystem::path& dir, State& s, std::string& command) {
  std::vector<std::string> args;
  for (const auto& line : read_lines(dir / "config.txt")) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config.txt: malformed line '" + line + "'");
    if (line.substr(0, eq) == "command") {
      command = line.substr(eq + 1);
      args.insert(args.begin(), command);
    } else {
      args.push_back("--" + line);
    }
  }
  if (command.empty()) throw ValidationError("config.txt does not name a command");
  auto app = make_app(s);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app->parse(rev);
  } catch (const CLI::ParseError& e) {
    throw ValidationError(std::string("config.txt does not parse: ") + e.what());
  }
  return app;
}

// Recovers (x, p) of every vertex and checks the vertex against the
// recomputed immersion.
Samples recover(Report& rep, const Curve& curve, const std::vector<io::MeshVertex>& verts) {
  std::vector<double> ps;
  for (const auto& v : verts) ps.push_back(v.param);
  const auto cps = curve.points(ps);
  const bool trans = curve.is_translator();
  const std::size_t k = curve.params().n();
  const auto& lam = curve.params().lambdas;
  Samples out;
  double off = 0.0, level = 0.0, ang = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const auto& cp = cps[i];
    std::vector<double> x(k);
    for (std::size_t j = 0; j < k; ++j) x[j] = (verts[i].z[j] * std::conj(cp.w[j])).real() / std::norm(cp.w[j]);
    const auto z = immerse(cp, curve, x).z;
    double scale = 1.0;
    for (const auto& zj : verts[i].z) scale = std::max(scale, std::abs(zj));
    for (std::size_t j = 0; j < z.size(); ++j) off = std::max(off, std::abs(z[j] - verts[i].z[j]) / scale);
    if (!trans) {
      double q = 0.0;
      for (std::size_t j = 0; j < k; ++j) q += lam[j] * x[j] * x[j];
      level = std::max(level, std::abs(q - 1.0));
    }
    ang = std::max(ang, std::abs(verts[i].theta - cp.theta));
    out.emplace_back(std::move(x), verts[i].param);
  }
  rep.check("vertex lies on the construction", off, 1e-10);
  if (!trans) rep.check("quadric level", level, 1e-9);
  rep.check("angle column", ang, 1e-9);
  return out;
}

std::vector<std::vector<double>> read_profile(const std::filesystem::path& path, std::size_t width) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ValidationError("'" + path.string() + "' is empty");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto r = io::parse_row(lines[i]);
    if (r.size() != width)
      throw ValidationError(path.filename().string() + " line " + std::to_string(i + 1) + ": expected " +
                            std::to_string(width) + " fields");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<io::MeshVertex> read_mesh(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  auto verts = io::read_mesh_csv(in);
  if (verts.empty()) throw ValidationError("mesh has no vertices");
  if (verts.front().z.size() != dim)
    throw ValidationError("mesh has " + std::to_string(verts.front().z.size()) + " coordinates, expected " +
                          std::to_string(dim));
  return verts;
}

}  // namespace

int cmd_verify(const VerifyOpts& o, const Common& c) {
  const std::filesystem::path dir = o.dir.empty() ? output_dir(c) : std::filesystem::path(o.dir);
  State s;
  std::string command;
  auto app = replay(dir, s, command);
  Report rep("verify");
  rep.line("dir", dir.string());
  rep.line("run", command);

  if (command == "expander") {
    const auto prof = build_expander(s.expander);
    ExpanderCurve curve(prof);
    const auto rows = read_profile(dir / "profile.csv", 1 + 2 * prof.n() + 1);
    std::vector<double> ys;
    for (const auto& r : rows) ys.push_back(r[0]);
    const auto vals = profile_eval(prof, ys);
    double dev = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < prof.n(); ++j) {
        dev = std::max(dev, std::abs(rows[i][1 + j] - vals[i].r[j]));
        dev = std::max(dev, std::abs(rows[i][1 + prof.n() + j] - vals[i].phi[j]));
      }
      dev = std::max(dev, std::abs(rows[i].back() - vals[i].theta));
    }
    rep.check("profile values", dev, 1e-9);
    const auto all = recover(rep, curve, read_mesh(dir / "mesh.csv", prof.n()));
    frame_checks(rep, curve, all, s.tol);
    soliton_checks(rep, curve, all, s.tol);
  } else if (command == "periodic" || command == "shrinker") {
    const bool shrinker = command == "shrinker";
    const auto& oo = shrinker ? s.shrinker : s.periodic;
    const auto spec = build_periodic_spec(oo, shrinker);
    const auto psi = oo.psi.empty() ? std::vector<double>(spec.n(), 0.0) : oo.psi;
    const auto orbit = compute_orbit(spec);
    const auto per = detect_periodicity(spec, orbit, oo.ptol, oo.qmax);
    const double T = mesh_period(orbit, per);
    const auto tspec = trajectory_spec(spec, psi);
    const auto rows = read_profile(dir / "profile.csv", 2 + spec.n() + 2);
    double drift = 0.0;
    std::vector<double> grid;
    for (const auto& r : rows) {
      ReducedState st;
      st.s = r[0];
      st.u = r[1];
      st.phis.assign(r.begin() + 2, r.begin() + 2 + static_cast<long>(spec.n()));
      st.theta = r[2 + spec.n()];
      drift = std::max(drift, std::abs(first_integral(tspec, st) - spec.A) / std::abs(spec.A));
      grid.push_back(r[0]);
    }
    rep.check("first integral", drift, s.tol.integral);
    const auto traj = orbit_profile(spec, psi, grid);
    double dev = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dev = std::max(dev, std::abs(rows[i][1] - traj.samples[i].u));
      for (std::size_t j = 0; j < spec.n(); ++j) dev = std::max(dev, std::abs(rows[i][2 + j] - traj.samples[i].phis[j]));
      dev = std::max(dev, std::abs(rows[i][2 + spec.n()] - traj.samples[i].theta));
    }
    rep.check("profile values", dev, 1e-8);
    if (std::filesystem::exists(dir / "mesh.csv")) {
      const auto curve = orbit_curve(spec, psi, T);
      const auto all = recover(rep, *curve, read_mesh(dir / "mesh.csv", spec.n()));
      frame_checks(rep, *curve, all, s.tol);
      soliton_checks(rep, *curve, all, s.tol);
    } else {
      rep.line("mesh", "absent");
    }
  } else if (command == "translator") {
    const auto prof = build_translator(s.translator);
    const double pm = s.translator.p_max;
    TranslatorCurve curve(prof, -pm, pm);
    const auto rows = read_profile(dir / "profile.csv", 4);
    std::vector<double> ps;
    for (const auto& r : rows) ps.push_back(r[0]);
    const auto cps = curve.points(ps);
    double dev = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dev = std::max({dev, std::abs(rows[i][1] - cps[i].beta.real()), std::abs(rows[i][2] - cps[i].beta.imag()),
                      std::abs(rows[i][3] - cps[i].theta)});
    }
    rep.check("profile values", dev, 1e-9);
    const auto all = recover(rep, curve, read_mesh(dir / "mesh.csv", prof.n()));
    frame_checks(rep, curve, all, s.tol);
    soliton_checks(rep, curve, all, s.tol);
    if (prof.alpha != 0.0) {
      const auto fit = maslov_angle_check(curve, all);
      rep.check("angle-height identity", std::abs(fit.c - prof.alpha * prof.K.imag()) + fit.max_residual, 1e-8);
    }
  } else {
    throw ValidationError("verify supports expander, shrinker, periodic and translator runs, not '" + command + "'");
  }

  std::cout << rep.text();
  if (!rep.ok()) {
    std::string names;
    for (const auto& f : rep.failures()) names += (names.empty() ? "" : ", ") + f;
    std::cerr << "verification failed: " << names << '\n';
    return kVerification;
  }
  return kOk;
}

}  // namespace cli
