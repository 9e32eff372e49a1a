// chiralloc: disorder-averaged dynamics of chirally coupled emitter arrays.
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chiralloc/commands.hpp"
#include "chiralloc/config.hpp"
#include "chiralloc/error.hpp"
#include "chiralloc/io.hpp"

namespace {

void print_schema() {
  const chiralloc::RunConfig defaults;
  const std::string text = chiralloc::to_config_text(defaults);
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disorder-averaged excitation dynamics of chiral emitter arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(chiralloc::tool_version()));

  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> seed, workers, out_dir, n_sites, directionality,
      xi, w_bar, horizon, realizations, disorder_mode, gamma_nr;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--workers", workers,
                    "worker threads (default: $CHIRALLOC_WORKERS or all cores)");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--n-sites", n_sites, "number of emitters");
    sub->add_option("--directionality", directionality, "D in [-1, 1]");
    sub->add_option("--xi", xi, "phase in [0, pi]; accepts e.g. 0.5pi");
    sub->add_option("--w-bar", w_bar, "disorder strength in [0, 1]");
    sub->add_option("--horizon", horizon, "final time gamma t");
    sub->add_option("--realizations", realizations, "disorder realizations");
    sub->add_option("--disorder-mode", disorder_mode, "phase | onsite");
    sub->add_option("--gamma-nr", gamma_nr, "non-guided loss rate");
    sub->add_option("--set", sets, "any config key as key=value (repeatable)");
  };

  const std::map<std::string, std::string> about = {
      {"simulate", "ensemble dynamics, profile cut, fit and transport label"},
      {"scan-boundary", "localized/delocalized labels on a (D, w) grid per xi"},
      {"scan-reentrance", "entropy decay-exponent ratio along a xi grid"},
      {"scan-zeta", "localization length on a (xi, D) grid"},
      {"spectral-stats", "gap-ratio statistics of the reciprocal chain"},
      {"oracle-check", "run the built-in analytic cross-checks"},
  };
  for (const auto& name : chiralloc::subcommands()) {
    add_run_flags(app.add_subcommand(name, about.at(name)));
  }
  std::string manifest_path;
  auto* repro = app.add_subcommand(
      "reproduce", "re-run a manifest and compare every content digest");
  repro->add_option("manifest", manifest_path, "manifest JSON")->required();
  repro->add_option("--out-dir", out_dir, "where to write the re-run");
  app.add_subcommand("schema", "print every config key with its default")
      ->callback(print_schema);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << R"({"status":"error","kind":"usage","exit_code":1})" << '\n';
    return chiralloc::kExitConfig;
  }

  if (app.got_subcommand("schema")) return chiralloc::kExitOk;
  if (app.got_subcommand("reproduce")) {
    return chiralloc::reproduce_manifest(manifest_path, out_dir.value_or(""),
                                         std::cout, std::cerr);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  chiralloc::RunConfig config;
  try {
    chiralloc::ConfigEntries entries;
    if (!config_path.empty()) entries = chiralloc::read_config_file(config_path);
    auto put = [&](const char* key, const std::optional<std::string>& v) {
      if (v) entries[key] = {*v, 0};
    };
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw chiralloc::ConfigError(s, 0, "--set expects key=value");
      }
      entries[s.substr(0, eq)] = {s.substr(eq + 1), 0};
    }
    put("seed", seed);
    put("workers", workers);
    put("out_dir", out_dir);
    put("n_sites", n_sites);
    put("directionality", directionality);
    put("xi", xi);
    put("w_bar", w_bar);
    put("horizon", horizon);
    put("realizations", realizations);
    put("disorder_mode", disorder_mode);
    put("gamma_nr", gamma_nr);
    config = chiralloc::resolve_config(entries);
  } catch (...) {
    const auto record = chiralloc::describe_error(std::current_exception());
    std::cerr << record.json << '\n';
    return record.exit_code;
  }
  return chiralloc::run_command(name, config, std::cout, std::cerr);
}
