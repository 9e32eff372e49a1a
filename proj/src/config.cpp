#include "chiralloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "chiralloc/error.hpp"

namespace chiralloc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

template <class T>
T parse_integer(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::out_of_range(what);
}

double finite(double x) {
  require(std::isfinite(x), "must be finite");
  return x;
}

double in_range(double x, double lo, double hi) {
  require(x >= lo && x <= hi,
          "must lie in [" + fmt(lo) + ", " + fmt(hi) + "], got " + fmt(x));
  return x;
}

double positive(double x) {
  require(std::isfinite(x) && x > 0.0, "must be positive, got " + fmt(x));
  return x;
}

std::vector<double> grid_in(std::vector<double> xs, double lo, double hi) {
  require(!xs.empty(), "must not be empty");
  for (double x : xs) in_range(x, lo, hi);
  return xs;
}

struct Field {
  const char* key;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"n_sites", "number of emitters N (>= 1)",
       [](RunConfig& c, const std::string& v) {
         c.params.n_sites = parse_integer<int>(v);
         require(c.params.n_sites >= 1, "must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.params.n_sites); }},
      {"gamma", "total guided decay rate; times are in units of 1/gamma",
       [](RunConfig& c, const std::string& v) {
         c.params.gamma = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.params.gamma); }},
      {"directionality", "D = (gamma_R - gamma_L) / gamma in [-1, 1]",
       [](RunConfig& c, const std::string& v) {
         c.params.directionality = in_range(parse_number(v), -1.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.params.directionality); }},
      {"xi", "propagation phase between neighbours in [0, pi]",
       [](RunConfig& c, const std::string& v) {
         c.params.xi = in_range(parse_number(v), 0.0, std::numbers::pi);
       },
       [](const RunConfig& c) { return fmt(c.params.xi); }},
      {"w_bar", "disorder strength in [0, 1]; W is uniform on pi [-w, w]",
       [](RunConfig& c, const std::string& v) {
         c.params.disorder_strength = in_range(parse_number(v), 0.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.params.disorder_strength); }},
      {"disorder_mode", "phase | onsite",
       [](RunConfig& c, const std::string& v) {
         c.params.disorder_mode = parse_disorder_mode(v);
       },
       [](const RunConfig& c) {
         return std::string(to_string(c.params.disorder_mode));
       }},
      {"gamma_nr", "non-guided loss rate (>= 0)",
       [](RunConfig& c, const std::string& v) {
         const double x = finite(parse_number(v));
         require(x >= 0.0, "must be >= 0");
         c.params.gamma_nr = x;
       },
       [](const RunConfig& c) { return fmt(c.params.gamma_nr); }},
      {"initial_site", "1-based initially excited site; 0 = centre",
       [](RunConfig& c, const std::string& v) {
         c.params.initial_site = parse_integer<int>(v);
         require(c.params.initial_site >= 0, "must be >= 0");
       },
       [](const RunConfig& c) { return std::to_string(c.params.initial_site); }},
      {"realizations", "disorder realizations R per ensemble (>= 1)",
       [](RunConfig& c, const std::string& v) {
         c.realizations = parse_integer<int>(v);
         require(c.realizations >= 1, "must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.realizations); }},
      {"horizon", "final time gamma t",
       [](RunConfig& c, const std::string& v) {
         c.horizon = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.horizon); }},
      {"stride", "snapshot spacing; must divide the horizon",
       [](RunConfig& c, const std::string& v) {
         c.stride = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.stride); }},
      {"max_step", "largest RK4 step",
       [](RunConfig& c, const std::string& v) {
         c.max_step = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.max_step); }},
      {"tolerance", "local error per unit time",
       [](RunConfig& c, const std::string& v) {
         c.tolerance = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.tolerance); }},
      {"seed", "base seed (unsigned 64-bit)",
       [](RunConfig& c, const std::string& v) {
         c.seed = parse_integer<std::uint64_t>(v);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"workers", "worker threads; 0 = CHIRALLOC_WORKERS or all cores",
       [](RunConfig& c, const std::string& v) {
         c.workers = parse_integer<int>(v);
         require(c.workers >= 0, "must be >= 0");
       },
       [](const RunConfig& c) { return std::to_string(c.workers); }},
      {"mirror_disorder", "negate every sampled phase (true | false)",
       [](RunConfig& c, const std::string& v) {
         c.mirror_disorder = parse_bool(v);
       },
       [](const RunConfig& c) {
         return std::string(c.mirror_disorder ? "true" : "false");
       }},
      {"split", "last site of entropy block A; 0 = ceil(N/2)",
       [](RunConfig& c, const std::string& v) {
         c.split = parse_integer<int>(v);
         require(c.split >= 0, "must be >= 0");
       },
       [](const RunConfig& c) { return std::to_string(c.split); }},
      {"out_dir", "output directory",
       [](RunConfig& c, const std::string& v) {
         require(!v.empty(), "must not be empty");
         c.out_dir = v;
       },
       [](const RunConfig& c) { return c.out_dir; }},
      {"edge_margin", "sites from the reference extreme that count as reached",
       [](RunConfig& c, const std::string& v) {
         c.edge_margin = parse_integer<int>(v);
         require(c.edge_margin >= 0, "must be >= 0");
       },
       [](const RunConfig& c) { return std::to_string(c.edge_margin); }},
      {"reference_level", "P_t(w = 0) level defining the reference time",
       [](RunConfig& c, const std::string& v) {
         c.reference_level = in_range(parse_number(v), 0.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.reference_level); }},
      {"entropy_level", "reference entropy level where the tail fit starts",
       [](RunConfig& c, const std::string& v) {
         c.entropy_level = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.entropy_level); }},
      {"tail_decades", "entropy tail window length in decades; 0 = to horizon",
       [](RunConfig& c, const std::string& v) {
         c.tail_decades = finite(parse_number(v));
         require(c.tail_decades >= 0.0, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt(c.tail_decades); }},
      {"search_horizon", "longest run used to find the reference time",
       [](RunConfig& c, const std::string& v) {
         c.search_horizon = positive(parse_number(v));
       },
       [](const RunConfig& c) { return fmt(c.search_horizon); }},
      {"cut_time", "time of the spatial profile cut",
       [](RunConfig& c, const std::string& v) {
         c.cut_time = finite(parse_number(v));
         require(c.cut_time >= 0.0, "must be >= 0");
       },
       [](const RunConfig& c) { return fmt(c.cut_time); }},
      {"d_grid", "directionalities of the boundary and zeta scans",
       [](RunConfig& c, const std::string& v) {
         c.d_grid = grid_in(parse_grid(v), -1.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.d_grid); }},
      {"w_grid", "disorder strengths of the boundary scan",
       [](RunConfig& c, const std::string& v) {
         c.w_grid = grid_in(parse_grid(v), 0.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.w_grid); }},
      {"xi_grid", "phases of the re-entrance scan",
       [](RunConfig& c, const std::string& v) {
         c.xi_grid = grid_in(parse_grid(v), 0.0, std::numbers::pi);
       },
       [](const RunConfig& c) { return fmt(c.xi_grid); }},
      {"xi_set", "phases of the zeta scan",
       [](RunConfig& c, const std::string& v) {
         c.xi_set = grid_in(parse_grid(v), 0.0, std::numbers::pi);
       },
       [](const RunConfig& c) { return fmt(c.xi_set); }},
      {"zeta_w_bar", "disorder strength of the zeta scan",
       [](RunConfig& c, const std::string& v) {
         c.zeta_w_bar = in_range(parse_number(v), 0.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.zeta_w_bar); }},
      {"spectral_w_grid", "disorder strengths of the gap-ratio scan",
       [](RunConfig& c, const std::string& v) {
         c.spectral_w_grid = grid_in(parse_grid(v), 0.0, 1.0);
       },
       [](const RunConfig& c) { return fmt(c.spectral_w_grid); }},
      {"hist_bins", "histogram bins on [0, 1]",
       [](RunConfig& c, const std::string& v) {
         c.hist_bins = parse_integer<int>(v);
         require(c.hist_bins >= 1, "must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.hist_bins); }},
      {"gap_convention", "effective-hamiltonian | generator",
       [](RunConfig& c, const std::string& v) {
         if (v == "effective-hamiltonian") {
           c.gap_convention = GapConvention::EffectiveHamiltonian;
         } else if (v == "generator") {
           c.gap_convention = GapConvention::Generator;
         } else {
           throw std::invalid_argument("expected effective-hamiltonian or "
                                       "generator, got '" + v + "'");
         }
       },
       [](const RunConfig& c) {
         return std::string(to_string(c.gap_convention));
       }},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

int line_of(const ConfigEntries& entries, const std::string& key) {
  const auto it = entries.find(key);
  return it == entries.end() ? 0 : it->second.line;
}

}  // namespace

EnsembleOptions RunConfig::ensemble_options() const {
  EnsembleOptions o;
  o.realizations = realizations;
  o.horizon = horizon;
  o.stride = stride;
  o.base_seed = seed;
  o.workers = workers;
  o.mirror_disorder = mirror_disorder;
  o.split = split;
  o.propagate.max_step = max_step;
  o.propagate.tolerance = tolerance;
  return o;
}

ScanOptions RunConfig::scan_options() const {
  ScanOptions o;
  o.ensemble = ensemble_options();
  o.edge_margin = edge_margin;
  o.reference_level = reference_level;
  o.entropy_level = entropy_level;
  o.tail_decades = tail_decades;
  o.search_horizon = search_horizon;
  return o;
}

const std::vector<KeyInfo>& config_schema() {
  static const std::vector<KeyInfo> schema = [] {
    std::vector<KeyInfo> out;
    for (const auto& f : fields()) out.push_back({f.key, f.help});
    return out;
  }();
  return schema;
}

double parse_number(const std::string& raw) {
  std::string text = trim(raw);
  double scale = 1.0;
  if (text.size() >= 2 && text.compare(text.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    text = trim(text.substr(0, text.size() - 2));
    if (text.empty() || text == "+") return scale;
    if (text == "-") return -scale;
    if (text.back() == '*') text = trim(text.substr(0, text.size() - 1));
  }
  double value = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected a number, got '" + trim(raw) + "'");
  }
  return value * scale;
}

std::vector<double> parse_grid(const std::string& raw) {
  const std::string text = trim(raw);
  for (const char* kind : {"lin:", "log:"}) {
    if (text.rfind(kind, 0) != 0) continue;
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(4));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) {
      throw std::invalid_argument("expected " + std::string(kind) +
                                  "lo:hi:count, got '" + text + "'");
    }
    const double lo = parse_number(parts[0]);
    const double hi = parse_number(parts[1]);
    const int count = parse_integer<int>(parts[2]);
    if (count < 1) throw std::invalid_argument("grid count must be >= 1");
    return kind[1] == 'i' ? linspace(lo, hi, count) : logspace(lo, hi, count);
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(content, line, "expected 'key = value'");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ConfigError(key, line, "missing key");
    if (find_field(key) == nullptr) {
      throw ConfigError(key, line, "unknown key");
    }
    if (entries.contains(key)) {
      throw ConfigError(key, line,
                        "repeated key (first set on line " +
                            std::to_string(entries[key].line) + ")");
    }
    entries[key] = {value, line};
  }
  return entries;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config", 0, "cannot open '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

RunConfig resolve_config(const ConfigEntries& entries) {
  RunConfig config;
  for (const auto& f : fields()) {
    const auto it = entries.find(f.key);
    if (it == entries.end()) continue;
    try {
      f.set(config, it->second.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(f.key, it->second.line, e.what());
    }
  }
  for (const auto& [key, entry] : entries) {
    if (find_field(key) == nullptr) {
      throw ConfigError(key, entry.line, "unknown key");
    }
  }

  auto check = [&](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, line_of(entries, key), what);
  };
  const double steps = config.horizon / config.stride;
  check(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
        "stride", "must divide the horizon");
  check(config.cut_time <= config.horizon, "cut_time",
        "must not exceed the horizon");
  check(config.params.initial_site <= config.params.n_sites, "initial_site",
        "must not exceed n_sites");
  check(config.split < config.params.n_sites, "split",
        "must be smaller than n_sites");
  try {
    config.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", 0, e.what());
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path,
                       const ConfigEntries& overrides) {
  ConfigEntries entries = read_config_file(path);
  for (const auto& [key, entry] : overrides) entries[key] = entry;
  return resolve_config(entries);
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += "# ";
    out += f.help;
    out += '\n';
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace chiralloc
