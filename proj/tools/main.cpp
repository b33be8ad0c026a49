#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "commands.hpp"
#include "lagsol/errors.hpp"

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// True if `msg` mentions `flag` as a whole option name.
bool names_option(const std::string& msg, const std::string& flag) {
  for (auto pos = msg.find(flag); pos != std::string::npos; pos = msg.find(flag, pos + 1)) {
    const auto end = pos + flag.size();
    if (end == msg.size() || !(std::isalnum(static_cast<unsigned char>(msg[end])) || msg[end] == '-')) return true;
  }
  return false;
}

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

// key=value lines; '#' starts a comment line.  Keys are long option
// names without the dashes.  "command" is accepted and ignored so that a
// recorded config.txt can be fed back.
std::vector<ConfigEntry> read_config(const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw lagsol::ValidationError("cannot open config file '" + path + "'");
  std::vector<ConfigEntry> out;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = path + " line " + std::to_string(lineno);
    if (eq == std::string::npos) throw lagsol::ValidationError(where + ": expected key=value, got '" + t + "'");
    ConfigEntry e{trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno};
    if (e.key.empty()) throw lagsol::ValidationError(where + ": empty key");
    if (e.key == "command") {
      if (e.value != sub.get_name())
        throw lagsol::ValidationError(where + ": config is for '" + e.value + "', not '" + sub.get_name() + "'");
      continue;
    }
    if (e.key == "config" || !sub.get_option_no_throw("--" + e.key))
      throw lagsol::ValidationError(where + ": unknown key '" + e.key + "' for " + sub.get_name());
    if (seen.count(e.key))
      throw lagsol::ValidationError(where + ": key '" + e.key + "' repeats line " + std::to_string(seen[e.key]));
    seen[e.key] = lineno;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  cli::State state;
  auto app = cli::make_app(state);
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<ConfigEntry> config;
  try {
    // flags win: config entries only fill options absent from the command line
    const CLI::App* sub = nullptr;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!sub && !args[i].empty() && args[i][0] != '-') sub = app->get_subcommand_no_throw(args[i]);
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty() && sub) {
      config = read_config(config_path, *sub);
      for (const auto& e : config) {
        if (!on_command_line(args, "--" + e.key)) args.push_back("--" + e.key + "=" + e.value);
      }
    }
  } catch (const lagsol::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kValidation;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app->parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (const auto& c : config) {
      if (names_option(msg, "--" + c.key)) msg += " (config line " + std::to_string(c.line) + ")";
    }
    std::cerr << "usage error: " << msg << "\nRun with --help for usage.\n";
    return cli::kValidation;
  }

  try {
    return cli::dispatch(*app, state);
  } catch (const lagsol::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return cli::kValidation;
  } catch (const lagsol::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return cli::kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNumerical;
  }
}
