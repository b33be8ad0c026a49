#include <cstdlib>
#include <sstream>

#include "commands.hpp"

namespace cli {

namespace {

void list_option(CLI::App& sub, const std::string& name, std::vector<double>& v, const std::string& desc,
                 bool required = false) {
  auto* o = sub.add_option(name, v, desc)->delimiter(',');
  if (required) o->required();
}

void positive_count(CLI::App& sub, const std::string& name, std::size_t& v, const std::string& desc) {
  sub.add_option(name, v, desc)->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
}

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--out", c.out, "output directory (default $LAGSOL_OUTPUT_DIR or .)");
  sub.add_option("--projection", c.projection, "PLY projection: three ';'-separated rows of 2n reals");
  sub.add_flag("--no-ply", c.no_ply, "skip the PLY export");
}

void add_tolerances(CLI::App& sub, Tolerances& t) {
  const auto pos = CLI::PositiveNumber;
  sub.add_option("--lag-tol", t.lag, "Lagrangian residual threshold")->check(pos);
  sub.add_option("--angle-tol", t.angle, "angle residual threshold")->check(pos);
  sub.add_option("--soliton-tol", t.soliton, "soliton residual threshold")->check(pos);
  sub.add_option("--sl-tol", t.sl, "|H| threshold for alpha = 0")->check(pos);
  sub.add_option("--integral-tol", t.integral, "first-integral drift threshold")->check(pos);
  positive_count(sub, "--check-points", t.check_points, "points for the finite-difference soliton check");
}

void add_expander(CLI::App& sub, ExpanderOpts& o) {
  sub.add_option("--n", o.n, "dimension (must match --a)");
  sub.add_option("--alpha", o.alpha, "soliton constant (>= 0)")->required();
  list_option(sub, "--a", o.a, "positive a_1..a_n", true);
  list_option(sub, "--psi", o.psi, "phases psi_1..psi_n (default 0)");
  sub.add_option("--y-max", o.y_max, "profile range [-y_max, y_max]")->check(CLI::PositiveNumber);
  positive_count(sub, "--samples", o.samples, "profile samples");
  positive_count(sub, "--xsamples", o.xsamples, "sphere points per profile sample");
  sub.add_option("--seed", o.seed, "sampling seed");
}

void add_orbit(CLI::App& sub, OrbitOpts& o, bool with_lambdas) {
  if (with_lambdas) list_option(sub, "--lambdas", o.lambdas, "signs lambda_j = +-1, positives first", true);
  sub.add_option("--alpha", o.alpha, "soliton constant")->required();
  list_option(sub, "--alphas", o.alphas, "alpha_j = r_j^2 at the base point", true);
  auto* a = sub.add_option("--A", o.A, "first integral at the base point");
  auto* f = sub.add_option("--A-frac", o.A_frac, "A as a fraction of its maximum, in (0, 1]");
  a->excludes(f);
  f->excludes(a);
  list_option(sub, "--psi", o.psi, "initial phases (default 0)");
  sub.add_option("--qmax", o.qmax, "largest denominator tried")->check(CLI::Range(1L, 100000L));
  sub.add_option("--ptol", o.ptol, "periodicity tolerance (default 1e-9 qmax)");
  sub.add_flag("--mesh", o.mesh, "export a mesh for periodic orbits");
  positive_count(sub, "--samples", o.samples, "profile samples per mesh period");
  positive_count(sub, "--xsamples", o.xsamples, "quadric points per profile sample");
  sub.add_option("--rho-max", o.rho_max, "quadric sampling radius")->check(CLI::NonNegativeNumber);
  sub.add_option("--seed", o.seed, "sampling seed");
}

void add_search(CLI::App& sub, SearchOpts& o) {
  list_option(sub, "--lambdas", o.lambdas, "signs lambda_j = +-1, positives first", true);
  sub.add_option("--alpha", o.alpha, "soliton constant")->required();
  list_option(sub, "--target", o.target, "target holonomies gamma_1..gamma_n", true);
  sub.add_option("--tol", o.tol, "residual tolerance")->check(CLI::PositiveNumber);
  sub.add_option("--max-iter", o.max_iter, "Newton iterations")->check(CLI::Range(1, 10000));
}

void add_translator(CLI::App& sub, TranslatorOpts& o) {
  sub.add_option("--alpha", o.alpha, "translating speed")->required();
  list_option(sub, "--a", o.a, "explicit base: positive a_1..a_{n-1}");
  list_option(sub, "--lambdas", o.lambdas, "periodic base: signs");
  list_option(sub, "--alphas", o.alphas, "periodic base: alpha_j");
  auto* a = sub.add_option("--A", o.A, "periodic base: first integral");
  auto* f = sub.add_option("--A-frac", o.A_frac, "periodic base: A as a fraction of its maximum");
  a->excludes(f);
  f->excludes(a);
  list_option(sub, "--psi", o.psi, "periodic base: initial phases");
  list_option(sub, "--K", o.K, "integration constant re,im (default -u_star/2)");
  sub.add_option("--p-max", o.p_max, "profile range [-p_max, p_max]")->check(CLI::PositiveNumber);
  positive_count(sub, "--samples", o.samples, "profile samples");
  positive_count(sub, "--xsamples", o.xsamples, "x samples per profile sample");
  sub.add_option("--seed", o.seed, "sampling seed");
}

void add_invert(CLI::App& sub, InvertOpts& o) {
  sub.add_option("--alpha", o.alpha, "soliton constant (>= 0)")->required();
  list_option(sub, "--target", o.target, "target angles in (0, pi/2)", true);
  sub.add_option("--tol", o.tol, "residual tolerance")->check(CLI::PositiveNumber);
}

}  // namespace

std::filesystem::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("LAGSOL_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::unique_ptr<CLI::App> make_app(State& s) {
  auto app = std::make_unique<CLI::App>("Lagrangian solitons from evolving quadrics", "lagsol");
  app->option_defaults()->always_capture_default();
  app->require_subcommand(1);

  auto* e = app->add_subcommand("expander", "explicit self-expanders and the alpha = 0 necks");
  add_expander(*e, s.expander);
  auto* sh = app->add_subcommand("shrinker", "compact shrinkers: all lambda_j = +1, alpha < 0");
  add_orbit(*sh, s.shrinker, false);
  auto* p = app->add_subcommand("periodic", "bounded orbits: period, holonomies, periodicity");
  add_orbit(*p, s.periodic, true);
  auto* ps = app->add_subcommand("periodic-search", "solve for data with prescribed holonomies");
  add_search(*ps, s.search);
  auto* t = app->add_subcommand("translator", "translating solitons");
  add_translator(*t, s.translator);
  auto* inv = app->add_subcommand("invert-angles", "a from prescribed asymptotic angles");
  add_invert(*inv, s.invert);
  auto* fl = app->add_subcommand("flow-family", "level sets t of one periodic orbit");
  add_orbit(*fl, s.flow.orbit, true);
  list_option(*fl, "--t", s.flow.ts, "levels t", true);
  auto* v = app->add_subcommand("verify", "re-check exported mesh and profile");
  v->add_option("--dir", s.verify.dir, "directory written by an earlier run (default: output directory)");

  for (auto* sub : {e, sh, p, ps, t, inv, fl, v}) {
    add_common(*sub, s.common);
    sub->add_option("--config", "key=value file; flags win on conflict");
  }
  for (auto* sub : {e, sh, p, t}) add_tolerances(*sub, s.tol);
  return app;
}

std::string resolved_config(const CLI::App& sub) {
  std::ostringstream out;
  out << "command=" << sub.get_name() << '\n';
  for (const auto* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      if (opt->get_type_size() == 0) {
        value = "true";
      } else {
        const auto& r = opt->results();
        for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
      }
    } else {
      value = opt->get_default_str();
    }
    if (value.empty() || value == "{}" || (opt->get_type_size() == 0 && value != "true")) continue;
    out << name << '=' << value << '\n';
  }
  return out.str();
}

int dispatch(const CLI::App& app, const State& s) {
  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "expander") return cmd_expander(*sub, s.common, s.tol, s.expander);
  if (name == "shrinker") return cmd_periodic(*sub, s.common, s.tol, s.shrinker, true);
  if (name == "periodic") return cmd_periodic(*sub, s.common, s.tol, s.periodic, false);
  if (name == "periodic-search") return cmd_search(*sub, s.common, s.search);
  if (name == "translator") return cmd_translator(*sub, s.common, s.tol, s.translator);
  if (name == "invert-angles") return cmd_invert(*sub, s.common, s.invert);
  if (name == "flow-family") return cmd_flow(*sub, s.common, s.flow);
  return cmd_verify(s.verify, s.common);
}

}  // namespace cli
