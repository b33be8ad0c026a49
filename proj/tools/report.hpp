#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "commands.hpp"
#include "lagsol/expander.hpp"
#include "lagsol/io.hpp"
#include "lagsol/reduced_ode.hpp"
#include "lagsol/translator.hpp"

namespace cli {

using Samples = std::vector<std::pair<std::vector<double>, double>>;

// Summary text: key=value lines, then one line per check.
class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  void line(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }

  bool check(const std::string& name, double value, double limit) {
    const bool pass = value < limit;  // NaN fails
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s (%.3e, limit %.1e)", pass ? "pass" : "FAIL", value, limit);
    checks_.emplace_back(name, buf);
    if (!pass) failed_.push_back(name);
    return pass;
  }

  bool ok() const { return failed_.empty(); }
  const std::vector<std::string>& failures() const { return failed_; }

  std::string text() const {
    std::string s = "command=" + command_ + "\n";
    for (const auto& [k, v] : lines_) s += k + "=" + v + "\n";
    for (const auto& [k, v] : checks_) s += "check " + k + ": " + v + "\n";
    s += std::string("status=") + (ok() ? "pass" : "FAIL") + "\n";
    return s;
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> lines_;
  std::vector<std::pair<std::string, std::string>> checks_;
  std::vector<std::string> failed_;
};

std::filesystem::path prepare_dir(const Common& c);
void write_file(const std::filesystem::path& path, const std::string& text);
void write_mesh(const std::filesystem::path& dir, const std::string& stem, const Common& c,
                const std::vector<lagsol::io::MeshVertex>& vertices);
// `count` evenly spaced entries of `all`, ends included.
Samples strided(const Samples& all, std::size_t count);
std::vector<lagsol::io::MeshVertex> mesh_vertices(const lagsol::Curve& curve,
                                                  const std::vector<lagsol::CurvePoint>& cps,
                                                  const std::vector<std::vector<double>>& xs, Samples* samples);
void frame_checks(Report& rep, const lagsol::Curve& curve, const Samples& all, const Tolerances& t);
void soliton_checks(Report& rep, const lagsol::Curve& curve, const Samples& all, const Tolerances& t);

lagsol::ExpanderProfile build_expander(const ExpanderOpts& o);
lagsol::TranslatorProfile build_translator(const TranslatorOpts& o);
lagsol::ReducedTrajectory orbit_profile(const lagsol::PeriodicSpec& spec, const std::vector<double>& psi,
                                        std::span<const double> grid);

}  // namespace cli
