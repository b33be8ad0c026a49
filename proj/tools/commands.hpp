#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lagsol/curve.hpp"
#include "lagsol/periodic.hpp"

namespace cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;
constexpr int kVerification = 4;

struct Common {
  std::string out;
  std::string projection;  // "r1;r2;r3", each a comma list of 2n reals
  bool no_ply = false;
};

struct Tolerances {
  double lag = 1e-10;
  double angle = 1e-9;
  double soliton = 1e-3;
  double sl = 1e-4;
  double integral = 1e-8;
  std::size_t check_points = 24;
};

struct ExpanderOpts {
  std::optional<std::size_t> n;
  double alpha = 0.0;
  std::vector<double> a;
  std::vector<double> psi;
  double y_max = 3.0;
  std::size_t samples = 201;
  std::size_t xsamples = 8;
  std::uint64_t seed = 1;
};

// Shared by periodic, shrinker and flow-family.
struct OrbitOpts {
  std::vector<double> lambdas;
  double alpha = 0.0;
  std::vector<double> alphas;
  std::optional<double> A;
  std::optional<double> A_frac;
  std::vector<double> psi;
  long qmax = 64;
  double ptol = 0.0;
  bool mesh = false;
  std::size_t samples = 201;
  std::size_t xsamples = 8;
  double rho_max = 1.0;
  std::uint64_t seed = 1;
};

struct SearchOpts {
  std::vector<double> lambdas;
  double alpha = 0.0;
  std::vector<double> target;
  double tol = 1e-10;
  int max_iter = 50;
};

struct TranslatorOpts {
  double alpha = 0.0;
  std::vector<double> a;
  std::vector<double> lambdas;
  std::vector<double> alphas;
  std::optional<double> A;
  std::optional<double> A_frac;
  std::vector<double> psi;
  std::vector<double> K;  // re,im
  double p_max = 3.0;
  std::size_t samples = 101;
  std::size_t xsamples = 8;
  std::uint64_t seed = 1;
};

struct InvertOpts {
  double alpha = 0.0;
  std::vector<double> target;
  double tol = 1e-10;
};

struct FlowOpts {
  OrbitOpts orbit;
  std::vector<double> ts;
};

struct VerifyOpts {
  std::string dir;
};

struct State {
  Common common;
  Tolerances tol;
  ExpanderOpts expander;
  OrbitOpts periodic;
  OrbitOpts shrinker;
  SearchOpts search;
  TranslatorOpts translator;
  InvertOpts invert;
  FlowOpts flow;
  VerifyOpts verify;
};

// All subcommands wired to the fields of `s`.
std::unique_ptr<CLI::App> make_app(State& s);

// Runs the selected subcommand of a parsed app.
int dispatch(const CLI::App& app, const State& s);

// Resolved options of a subcommand as key=value lines (help, config and
// out excluded), in declaration order.
std::string resolved_config(const CLI::App& sub);

// Builders shared with verify.
lagsol::PeriodicSpec build_periodic_spec(const OrbitOpts& o, bool shrinker);
std::shared_ptr<const lagsol::Curve> orbit_curve(const lagsol::PeriodicSpec& spec,
                                                 const std::vector<double>& psi, double s_max);
// Period of the mesh: T when periodic, else S.
double mesh_period(const lagsol::PeriodicOrbit& orbit, const lagsol::Periodicity& per);

int cmd_expander(const CLI::App& sub, const Common& c, const Tolerances& t, const ExpanderOpts& o);
int cmd_periodic(const CLI::App& sub, const Common& c, const Tolerances& t, const OrbitOpts& o,
                 bool shrinker);
int cmd_search(const CLI::App& sub, const Common& c, const SearchOpts& o);
int cmd_translator(const CLI::App& sub, const Common& c, const Tolerances& t, const TranslatorOpts& o);
int cmd_invert(const CLI::App& sub, const Common& c, const InvertOpts& o);
int cmd_flow(const CLI::App& sub, const Common& c, const FlowOpts& o);
int cmd_verify(const VerifyOpts& o, const Common& c);

// Output directory: --out, else $LAGSOL_OUTPUT_DIR, else ".".
std::filesystem::path output_dir(const Common& c);

}  // namespace cli
