#include "chiralloc/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "chiralloc/error.hpp"
#include "chiralloc/experiments.hpp"
#include "chiralloc/io.hpp"
#include "chiralloc/oracles.hpp"
#include "chiralloc/spectral.hpp"

namespace chiralloc {

namespace {

using nlohmann::json;

std::string xi_tag(double xi) { return tag(xi / std::numbers::pi) + "pi"; }

std::string seed_tag(std::uint64_t seed) {
  return "_seed" + std::to_string(seed);
}

json params_json(const SystemParams& p) {
  return {{"n_sites", p.n_sites},
          {"gamma", p.gamma},
          {"directionality", p.directionality},
          {"xi", p.xi},
          {"w_bar", p.disorder_strength},
          {"disorder_mode", std::string(to_string(p.disorder_mode))},
          {"gamma_nr", p.gamma_nr},
          {"initial_site", p.start_site()}};
}

json config_json(const RunConfig& c) {
  std::stringstream text(to_config_text(c));
  json out = json::object();
  std::string line;
  while (std::getline(text, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

json fit_json(const LocalizationFit& f) {
  return {{"ok", f.ok},
          {"failure", f.failure},
          {"n_l", f.n_l},
          {"zeta_l", f.zeta_l},
          {"amplitude", f.amplitude},
          {"r_squared", f.r_squared},
          {"first_site", f.first_site},
          {"last_site", f.last_site},
          {"points", f.points}};
}

json powerlaw_json(const PowerLawFit& f) {
  return {{"ok", f.ok},
          {"failure", f.failure},
          {"beta", f.beta},
          {"prefactor", f.prefactor},
          {"r_squared", f.r_squared},
          {"points", f.points}};
}

json ratio_json(const ExponentRatio& r) {
  return {{"ok", r.ok},
          {"ratio", r.ratio},
          {"disordered", powerlaw_json(r.disordered)},
          {"reference", powerlaw_json(r.reference)}};
}

json provenance(const RunConfig& c) {
  return {{"tool_version", tool_version()},
          {"base_seed", c.seed},
          {"seed_rule", kSeedRule},
          {"cell_seed_rule",
           "cell seed = keyed(keyed(mix64(base_seed), bits(D)), bits(w_bar))"},
          {"realizations", c.realizations},
          {"horizon", c.horizon},
          {"stride", c.stride},
          {"params", params_json(c.params)}};
}

Table heatmap(const std::vector<double>& times, const Eigen::MatrixXd& grid) {
  Table t;
  t.columns.push_back("gamma_t");
  for (Eigen::Index n = 1; n <= grid.cols(); ++n) {
    t.columns.push_back("site_" + std::to_string(n));
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<Cell> row{times[k]};
    for (Eigen::Index n = 0; n < grid.cols(); ++n) {
      row.emplace_back(grid(static_cast<Eigen::Index>(k), n));
    }
    t.add_row(std::move(row));
  }
  return t;
}

void simulate(const RunConfig& c, ArtifactWriter& w, std::ostream& out) {
  const double wbar = c.params.disorder_strength;
  const std::vector<double> wl{wbar};
  const PopulationMap map =
      emit_population_map(c.params, wl, c.cut_time, c.scan_options());
  const PopulationPanel& panel = map.panels.front();
  const std::string seed = seed_tag(c.seed);
  const std::string wt = "_w" + tag(wbar);

  w.write_table("populations" + wt + seed,
                heatmap(panel.ensemble.times, panel.ensemble.avg_populations));
  w.write_table("reference_populations" + seed,
                heatmap(map.reference.times, map.reference.populations));

  const auto ref_cut =
      profile_at(map.reference.times, map.reference.populations, c.cut_time);
  const auto avg_norm = normalized(panel.cut);
  const auto ref_norm = normalized(ref_cut);
  Table cut;
  cut.columns = {"site", "population", "reference", "population_normalized",
                 "reference_normalized"};
  for (std::size_t n = 0; n < panel.cut.size(); ++n) {
    cut.add_row({static_cast<std::int64_t>(n + 1), panel.cut[n], ref_cut[n],
                 avg_norm[n], ref_norm[n]});
  }
  w.write_table("cut_t" + tag(c.cut_time) + wt + seed, cut);

  const auto ref_record =
      transport_record(map.reference.populations, c.params.start_site());
  Table ts;
  ts.columns = {"gamma_t",      "total",           "total_reference",
                "entropy_a",    "entropy_b",       "entropy_a_reference",
                "entropy_b_reference", "rpr",      "argmax_site",
                "argmax_site_reference"};
  const auto& e = panel.ensemble;
  for (std::size_t k = 0; k < e.times.size(); ++k) {
    ts.add_row({e.times[k], e.avg_total[k], map.reference.total[k],
                e.avg_entropy_a[k], e.avg_entropy_b[k],
                map.reference_entropy_a[k], map.reference_entropy_b[k],
                panel.rpr[k],
                static_cast<std::int64_t>(panel.transport.argmax_sites[k]),
                static_cast<std::int64_t>(ref_record.argmax_sites[k])});
  }
  w.write_table("timeseries" + wt + seed, ts);

  json summary = provenance(c);
  summary["ensemble_seed"] =
      cell_seed(c.seed, c.params.directionality, wbar);
  summary["split"] = e.split;
  summary["cut_time"] = c.cut_time;
  summary["cut_fit"] = fit_json(panel.fit);
  summary["classification"] = std::string(to_string(panel.phase));
  summary["edge_margin"] = c.edge_margin;
  summary["transport"] = {{"min_site", panel.transport.min_site},
                          {"max_site", panel.transport.max_site},
                          {"reached_edge", panel.transport.reached_edge},
                          {"reference_min_site", ref_record.min_site},
                          {"reference_max_site", ref_record.max_site}};
  summary["reference_level"] = c.reference_level;
  summary["reference_time"] =
      map.reference_time ? json(*map.reference_time) : json(nullptr);
  summary["entropy_exponents"] = ratio_json(panel.entropy_exponents);
  summary["final_total"] = e.avg_total.back();
  w.write_json("summary" + wt + seed + ".json", summary);

  out << "w_bar " << wbar << ": " << to_string(panel.phase) << ", cut fit n_L "
      << panel.fit.n_l << " R^2 " << panel.fit.r_squared << '\n';
}

void scan_boundary(const RunConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto scan = scan_phase_boundary(c.params, c.params.xi, c.d_grid,
                                        c.w_grid, c.scan_options());
  Table cells;
  cells.columns = {"directionality", "w_bar",          "label",
                   "computed",       "cell_seed",      "min_site",
                   "max_site",       "reference_min_site", "reference_max_site",
                   "final_total"};
  for (const auto& cell : scan.cells) {
    cells.add_row({cell.directionality, cell.disorder_strength,
                   std::string(to_string(cell.label)),
                   std::string(to_string(cell.computed)),
                   std::to_string(cell.seed),
                   static_cast<std::int64_t>(cell.min_site),
                   static_cast<std::int64_t>(cell.max_site),
                   static_cast<std::int64_t>(cell.reference_min_site),
                   static_cast<std::int64_t>(cell.reference_max_site),
                   cell.final_total});
  }
  const std::string stem = "_xi" + xi_tag(c.params.xi) + seed_tag(c.seed);
  w.write_table("boundary" + stem, cells);

  Table intervals;
  intervals.columns = {"directionality", "w_below", "w_above", "from", "to"};
  json columns = json::array();
  for (const auto& col : scan.columns) {
    for (const auto& t : col.transitions) {
      intervals.add_row({col.directionality, t.w_below, t.w_above,
                         std::string(to_string(t.from)),
                         std::string(to_string(t.to))});
    }
    columns.push_back(
        {{"directionality", col.directionality},
         {"first_localized",
          col.first_localized ? json(*col.first_localized) : json(nullptr)},
         {"transitions", col.transitions.size()}});
  }
  w.write_table("boundary_intervals" + stem, intervals);

  json summary = provenance(c);
  summary["d_grid"] = c.d_grid;
  summary["w_grid"] = c.w_grid;
  summary["edge_margin"] = c.edge_margin;
  summary["columns"] = columns;
  w.write_json("boundary_summary" + stem + ".json", summary);
  out << "scanned " << scan.cells.size() << " cells at xi/pi = "
      << c.params.xi / std::numbers::pi << '\n';
}

void scan_reentrance_cmd(const RunConfig& c, ArtifactWriter& w,
                         std::ostream& out) {
  const auto curve = scan_reentrance(c.params, c.xi_grid, c.scan_options());
  Table t;
  t.columns = {"xi",        "xi_over_pi", "ok",        "tail_start", "tail_end",
               "beta_w",    "beta_0",     "ratio",     "r_squared_w",
               "r_squared_0", "beta_w_b", "beta_0_b",  "ratio_b",
               "failure"};
  for (const auto& p : curve.points) {
    t.add_row({p.xi, p.xi / std::numbers::pi,
               static_cast<std::int64_t>(p.ok), p.tail_start, p.tail_end,
               p.a.disordered.beta, p.a.reference.beta, p.a.ratio,
               p.a.disordered.r_squared, p.a.reference.r_squared,
               p.b.disordered.beta, p.b.reference.beta, p.b.ratio, p.failure});
  }
  const std::string stem = "_D" + tag(c.params.directionality) + "_w" +
                           tag(c.params.disorder_strength) + seed_tag(c.seed);
  w.write_table("reentrance" + stem, t);
  json summary = provenance(c);
  summary["xi_grid"] = c.xi_grid;
  summary["threshold"] = curve.threshold;
  summary["entropy_level"] = c.entropy_level;
  summary["tail_decades"] = c.tail_decades;
  summary["ensemble_seed"] = cell_seed(c.seed, c.params.directionality,
                                       c.params.disorder_strength);
  summary["pattern"] = crossing_pattern(curve);
  int failed = 0;
  for (const auto& p : curve.points) failed += p.ok ? 0 : 1;
  summary["failed_points"] = failed;
  w.write_json("reentrance_summary" + stem + ".json", summary);
  out << "ratio pattern " << crossing_pattern(curve) << " (" << failed
      << " failed points)\n";
}

void scan_zeta(const RunConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto scan = scan_localization_length(c.params, c.zeta_w_bar, c.d_grid,
                                             c.xi_set, c.scan_options());
  Table t;
  t.columns = {"xi",      "xi_over_pi", "directionality", "ok",
               "reference_time", "n_l", "zeta_l",         "r_squared",
               "points",  "failure"};
  for (const auto& p : scan.points) {
    t.add_row({p.xi, p.xi / std::numbers::pi, p.directionality,
               static_cast<std::int64_t>(p.ok), p.reference_time, p.fit.n_l,
               p.fit.zeta_l, p.fit.r_squared,
               static_cast<std::int64_t>(p.fit.points), p.failure});
  }
  const std::string stem = "_w" + tag(c.zeta_w_bar) + seed_tag(c.seed);
  w.write_table("zeta" + stem, t);
  json summary = provenance(c);
  summary["zeta_w_bar"] = c.zeta_w_bar;
  summary["d_grid"] = c.d_grid;
  summary["xi_set"] = c.xi_set;
  summary["reference_level"] = c.reference_level;
  summary["search_horizon"] = c.search_horizon;
  w.write_json("zeta_summary" + stem + ".json", summary);
  out << "fitted " << scan.points.size() << " (xi, D) points\n";
}

void spectral_stats(const RunConfig& c, ArtifactWriter& w, std::ostream& out) {
  Table table;
  table.columns = {"w_bar",    "r_bar",        "v_i",          "r_a_variance",
                   "excluded", "max_residual", "max_trace_error", "seed"};
  Table gap_means, pooled;
  gap_means.columns = pooled.columns = {"bin_lo", "bin_hi"};
  std::vector<GapReport> reports;
  for (double wb : c.spectral_w_grid) {
    SystemParams p = c.params;
    p.disorder_strength = wb;
    const std::uint64_t seed = cell_seed(c.seed, 0.0, wb);
    reports.push_back(ensemble_gap_report(p, c.realizations, seed, c.hist_bins,
                                          c.workers, c.gap_convention));
    const auto& r = reports.back();
    table.add_row({wb, r.r_bar, r.v_i_mean, r.r_a_variance,
                   static_cast<std::int64_t>(r.excluded), r.max_residual,
                   r.max_trace_error, std::to_string(seed)});
    gap_means.columns.push_back("density_w" + tag(wb));
    pooled.columns.push_back("density_w" + tag(wb));
    out << "w_bar " << wb << ": r_bar " << r.r_bar << ", <v_I> " << r.v_i_mean
        << '\n';
  }
  for (int b = 0; b < c.hist_bins; ++b) {
    const auto& h0 = reports.front().gap_mean_histogram;
    const double lo = h0.lo + b * h0.bin_width();
    std::vector<Cell> gm{lo, lo + h0.bin_width()};
    std::vector<Cell> pl{lo, lo + h0.bin_width()};
    for (const auto& r : reports) {
      gm.emplace_back(r.gap_mean_histogram.density[b]);
      pl.emplace_back(r.pooled_histogram.density[b]);
    }
    gap_means.add_row(std::move(gm));
    pooled.add_row(std::move(pl));
  }
  const std::string stem = "_xi" + xi_tag(c.params.xi) + seed_tag(c.seed);
  w.write_table("spectral" + stem, table);
  w.write_table("histogram_gap_means" + stem, gap_means);
  w.write_table("histogram_pooled" + stem, pooled);
  json summary = provenance(c);
  summary["spectral_w_grid"] = c.spectral_w_grid;
  summary["gap_convention"] = std::string(to_string(c.gap_convention));
  summary["hist_bins"] = c.hist_bins;
  summary["goe_mean_ratio"] = kGoeMeanRatio;
  summary["poisson_mean_ratio"] = kPoissonMeanRatio;
  w.write_json("spectral_summary" + stem + ".json", summary);
}

bool oracle_check(const RunConfig& c, ArtifactWriter& w, std::ostream& out) {
  const auto results = run_oracles();
  Table t;
  t.columns = {"oracle", "deviation", "tolerance", "pass"};
  bool all = true;
  for (const auto& r : results) {
    t.add_row({r.name, r.deviation, r.tolerance,
               static_cast<std::int64_t>(r.pass)});
    all = all && r.pass;
    char line[256];
    std::snprintf(line, sizeof line, "%-4s %-58s %10.3e <= %.1e\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.deviation,
                  r.tolerance);
    out << line;
  }
  w.write_table("oracle_check" + seed_tag(c.seed), t);
  out << (all ? "all oracles passed" : "oracle failures") << '\n';
  return all;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "simulate",       "scan-boundary", "scan-reentrance",
      "scan-zeta",      "spectral-stats", "oracle-check"};
  return names;
}

ErrorRecord describe_error(const std::exception_ptr& error) {
  json record;
  ErrorRecord out;
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfig;
    record = {{"kind", "config"}, {"key", e.key()}, {"line", e.line()},
              {"message", e.what()}};
  } catch (const EnsembleError& e) {
    record = {{"kind", "numerical"}, {"realization", e.realization()},
              {"message", e.what()}};
  } catch (const NumericalError& e) {
    record = {{"kind", "numerical"}, {"message", e.what()}};
    if (e.time() >= 0.0) record["time"] = e.time();
  } catch (const std::invalid_argument& e) {
    out.exit_code = kExitConfig;
    record = {{"kind", "usage"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    record = {{"kind", "runtime"}, {"message", e.what()}};
  } catch (...) {
    record = {{"kind", "runtime"}, {"message", "unknown error"}};
  }
  record["status"] = "error";
  record["exit_code"] = out.exit_code;
  out.json = record.dump();
  return out;
}

int run_command(const std::string& subcommand, const RunConfig& input,
                std::ostream& out, std::ostream& err) {
  try {
    bool known = false;
    for (const auto& s : subcommands()) known = known || s == subcommand;
    if (!known) {
      throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
    }
    RunConfig c = input;
    if (subcommand == "spectral-stats") c.params.directionality = 0.0;

    RunManifest manifest;
    manifest.subcommand = subcommand;
    manifest.base_seed = c.seed;
    manifest.tool_version = tool_version();
    manifest.started_at = utc_timestamp();
    manifest.config_text = to_config_text(c);
    manifest.config = config_json(c);

    ArtifactWriter writer(c.out_dir);
    bool ok = true;
    if (subcommand == "simulate") {
      simulate(c, writer, out);
    } else if (subcommand == "scan-boundary") {
      scan_boundary(c, writer, out);
    } else if (subcommand == "scan-reentrance") {
      scan_reentrance_cmd(c, writer, out);
    } else if (subcommand == "scan-zeta") {
      scan_zeta(c, writer, out);
    } else if (subcommand == "spectral-stats") {
      spectral_stats(c, writer, out);
    } else {
      ok = oracle_check(c, writer, out);
    }

    const std::string stem = subcommand + seed_tag(c.seed);
    manifest.config_file = "config_" + stem + ".conf";
    writer.write_text(manifest.config_file, manifest.config_text);
    manifest.outputs = writer.outputs();
    manifest.finished_at = utc_timestamp();
    const auto path = writer.directory() / ("manifest_" + stem + ".json");
    std::ofstream(path, std::ios::binary) << manifest.to_json().dump(2) << '\n';
    out << "manifest " << path.string() << '\n';
    if (!ok) {
      err << json{{"status", "error"},
                  {"kind", "oracle"},
                  {"message", "one or more oracles failed"},
                  {"exit_code", kExitNumerical}}
                 .dump()
          << '\n';
      return kExitNumerical;
    }
    return kExitOk;
  } catch (...) {
    const auto record = describe_error(std::current_exception());
    err << record.json << '\n';
    return record.exit_code;
  }
}

int reproduce_manifest(const std::filesystem::path& manifest_path,
                       const std::filesystem::path& out_dir, std::ostream& out,
                       std::ostream& err) {
  try {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
      throw std::invalid_argument("cannot open '" + manifest_path.string() + "'");
    }
    const RunManifest m = RunManifest::from_json(json::parse(in));
    RunConfig c = resolve_config(parse_config_text(m.config_text));
    if (!out_dir.empty()) c.out_dir = out_dir.string();
    const int code = run_command(m.subcommand, c, out, err);
    if (code != kExitOk) return code;
    int mismatches = 0;
    for (const auto& o : m.outputs) {
      if (o.path == m.config_file) continue;  // records out_dir
      std::ifstream f(std::filesystem::path(c.out_dir) / o.path,
                      std::ios::binary);
      std::stringstream buf;
      buf << f.rdbuf();
      const bool same = f && sha256_hex(buf.str()) == o.sha256;
      if (!same) {
        ++mismatches;
        out << "MISMATCH " << o.path << '\n';
      }
    }
    out << (mismatches == 0 ? "all digests reproduced" : "digest mismatches")
        << " (" << m.outputs.size() << " files)\n";
    if (mismatches > 0) {
      err << json{{"status", "error"},
                  {"kind", "reproduction"},
                  {"mismatches", mismatches},
                  {"exit_code", kExitNumerical}}
                 .dump()
          << '\n';
      return kExitNumerical;
    }
    return kExitOk;
  } catch (...) {
    const auto record = describe_error(std::current_exception());
    err << record.json << '\n';
    return record.exit_code;
  }
}

}  // namespace chiralloc
