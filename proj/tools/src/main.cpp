#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fk/error.hpp"
#include "fk/version.hpp"
#include "fk_cli/config.hpp"
#include "fk_cli/pipelines.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

void bind_key(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.emplace_back(key, v); }, help);
}

struct Common {
  std::string config_file;
  bool print_config = false;
};

void add_common(CLI::App* app, Overrides& o, Common& common, bool seed_required) {
  app->add_option("--config", common.config_file, "run-config file (INI key = value)");
  app->add_flag("--print-config", common.print_config, "print the resolved config and exit");
  bind_key(app, o, "--model", "model", "potential name (classical-fk, two-well-fk, pinned-fk, ...)");
  bind_key(app, o, "--dimension", "model.dimension", "lattice dimension n");
  app->add_option_function<std::vector<std::string>>(
      "--param",
      [&o](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--param", "expects name=value");
          o.emplace_back("model." + item.substr(0, eq), item.substr(eq + 1));
        }
      },
      "potential parameter name=value (repeatable)");
  auto* seed = app->add_option_function<std::string>(
      "--seed", [&o](const std::string& v) { o.emplace_back("seed", v); }, "random seed");
  if (seed_required) seed->required();
  bind_key(app, o, "--tol", "flow.tol", "stationarity tolerance (l2 gradient norm)");
  bind_key(app, o, "--dt", "flow.dt", "flow step (0 = safe step)");
  bind_key(app, o, "--t-max", "flow.t_max", "flow time horizon");
  bind_key(app, o, "--probes", "probes", "probe count for gap detection");
  bind_key(app, o, "--out", "out", "JSON manifest path");
  bind_key(app, o, "--csv", "csv", "CSV export path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary states of generalized Frenkel-Kontorova lattice models"};
  app.set_version_flag("--version", std::string(fk::kVersion));
  app.require_subcommand(1);

  Overrides o;
  Common common;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"minimize", "periodic minimizers and c0p"},
      {"gap", "adjacent ordered minimizer pair v0 < w0"},
      {"mpp", "periodic mountain-pass critical point and d0p"},
      {"hetero", "heteroclinic minimizer on the strip and c1q"},
      {"mph", "heteroclinic mountain pass and d1q"},
      {"multiplicity", "mountain pass on p(k) = (k, 1, ..., 1) for k = 1..k_max"},
      {"verify", "property suite; nonzero exit when a property fails"},
      {"landscape", "two-variable energy surface on p = (2, 1) as a,b,I CSV"},
  };
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    const std::string name = s.name;
    add_common(sub, o, common, fk::cli::needs_seed(name));
    if (name != "hetero" && name != "mph") bind_key(sub, o, "--p", "p", "periods, e.g. 2,1");
    if (name == "hetero" || name == "mph") {
      bind_key(sub, o, "--q", "q", "transverse periods, e.g. 2");
      sub->add_option_function<std::string>(
          "--window",
          [&o](const std::string& v) {
            if (v != "auto") o.emplace_back("window.initial", v);
          },
          "initial half width, or auto");
      bind_key(sub, o, "--window-cap", "window.cap", "largest half width");
    }
    if (name == "minimize") bind_key(sub, o, "--seeds", "seeds", "constant seed count");
    if (name == "mpp" || name == "mph" || name == "multiplicity") {
      bind_key(sub, o, "--nodes", "path.nodes", "path node count (0 = default)");
      bind_key(sub, o, "--mode", "path.mode", "node-flow or heat-flow");
    }
    if (name == "mpp" || name == "mph") bind_key(sub, o, "--path", "path.kind", "linear or chi");
    if (name == "mpp") bind_key(sub, o, "--k", "path.k", "chi path index");
    if (name == "multiplicity") bind_key(sub, o, "--k-max", "k_max", "largest k");
    if (name == "verify") bind_key(sub, o, "--trials", "trials", "trials per property");
    if (name == "landscape") bind_key(sub, o, "--grid", "grid", "grid points per axis");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    fk::cli::RunConfig config;
    if (!common.config_file.empty()) {
      std::ifstream f(common.config_file);
      if (!f) throw fk::cli::ConfigError("cannot read '" + common.config_file + "'", "config");
      std::stringstream ss;
      ss << f.rdbuf();
      config = fk::cli::parse_config(ss.str());
    }
    config.command = app.get_subcommands().front()->get_name();
    for (const auto& [key, value] : o) fk::cli::set_key(config, key, value);
    fk::cli::validate(config);
    if (common.print_config) {
      std::cout << fk::cli::print_config(config);
      return 0;
    }
    const fk::cli::RunManifest m = fk::cli::run(config);
    for (const auto& [key, value] : m.scalars)
      std::cout << key << " = " << fk::cli::format_scientific(value) << "\n";
    for (const auto& line : m.failures) std::cerr << "FAILED " << line << "\n";
    return m.success() ? 0 : 1;
  } catch (const fk::cli::ConfigError& e) {
    std::cerr << "config error (" << e.key() << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
