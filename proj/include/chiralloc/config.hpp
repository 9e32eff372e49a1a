#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "chiralloc/experiments.hpp"
#include "chiralloc/model.hpp"
#include "chiralloc/spectral.hpp"

namespace chiralloc {

// Fully resolved run configuration. Every field has a default, so an empty
// file is a valid configuration.
struct RunConfig {
  // Defaults differ from SystemParams{}: D = 0.2 and w_bar = 0.2.
  SystemParams params = default_params();

  // Ensemble and integration.
  int realizations = 200;
  double horizon = 1500.0;
  double stride = 1.0;
  double max_step = 5e-3;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  int workers = 0;
  bool mirror_disorder = false;
  int split = 0;

  // Output.
  std::string out_dir = "out";

  // Observables.
  int edge_margin = 2;
  double reference_level = 0.1;
  double entropy_level = 0.1;
  double tail_decades = 1.0;
  double search_horizon = 20000.0;
  double cut_time = 1500.0;

  // Scans.
  std::vector<double> d_grid = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};
  std::vector<double> w_grid = logspace(0.005, 1.0, 12);
  std::vector<double> xi_grid = linspace(0.0, std::numbers::pi, 9);
  std::vector<double> xi_set = {0.0, std::numbers::pi / 8.0,
                                std::numbers::pi / 2.0};
  double zeta_w_bar = 0.5;
  std::vector<double> spectral_w_grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
  int hist_bins = 50;
  GapConvention gap_convention = GapConvention::EffectiveHamiltonian;

  static SystemParams default_params() {
    SystemParams p;
    p.directionality = 0.2;
    p.disorder_strength = 0.2;
    return p;
  }

  EnsembleOptions ensemble_options() const;
  ScanOptions scan_options() const;
};

// Raw `key = value` pairs with the line they came from (0 = command line).
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

// Every accepted key with its documentation, in schema order.
struct KeyInfo {
  const char* key;
  const char* help;
};
const std::vector<KeyInfo>& config_schema();

// Parses `key = value` lines; `#` starts a comment. Unknown and repeated keys
// throw ConfigError with the key and line.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries read_config_file(const std::filesystem::path& path);

// Applies entries onto the defaults and validates the result. Throws
// ConfigError naming the key and line on a type or range error.
RunConfig resolve_config(const ConfigEntries& entries);

// Convenience: read_config_file + overrides (which win) + resolve_config.
RunConfig parse_config(const std::filesystem::path& path,
                       const ConfigEntries& overrides = {});

// Flat text that resolve_config(parse_config_text(...)) maps back onto the
// same configuration bit for bit.
std::string to_config_text(const RunConfig& config);

// Number syntax: plain decimal, or a multiple of pi written "0.5pi" / "pi".
double parse_number(const std::string& text);
// Lists: "a, b, c", "lin:lo:hi:n", or "log:lo:hi:n".
std::vector<double> parse_grid(const std::string& text);

}  // namespace chiralloc
