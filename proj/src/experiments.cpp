#include "chiralloc/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "chiralloc/error.hpp"
#include "chiralloc/rng.hpp"

namespace chiralloc {

namespace {

std::uint64_t bits_of(double x) {
  return std::bit_cast<std::uint64_t>(x + 0.0);  // folds -0 into +0
}

double round_up_to_stride(double t, double stride) {
  return std::ceil(t / stride - 1e-9) * stride;
}

EnsembleOptions cell_options(const ScanOptions& options, double d, double w) {
  EnsembleOptions out = options.ensemble;
  out.base_seed = cell_seed(options.ensemble.base_seed, d, w);
  return out;
}

std::vector<double> row_vector(const Eigen::MatrixXd& grid, Eigen::Index row) {
  std::vector<double> out(static_cast<std::size_t>(grid.cols()));
  for (Eigen::Index j = 0; j < grid.cols(); ++j) out[j] = grid(row, j);
  return out;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, double directionality,
                        double disorder_strength) {
  return rng::keyed(rng::keyed(rng::mix64(base_seed), bits_of(directionality)),
                    bits_of(disorder_strength));
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("linspace needs count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * i / (count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0)) {
    throw std::invalid_argument("logspace bounds must be positive");
  }
  auto out = linspace(std::log(lo), std::log(hi), count);
  for (double& x : out) x = std::exp(x);
  out.front() = lo;
  if (count > 1) out.back() = hi;
  return out;
}

std::string_view to_string(CellLabel label) {
  switch (label) {
    case CellLabel::Localized: return "L";
    case CellLabel::Delocalized: return "D";
    case CellLabel::Excluded: return "X";
  }
  return "?";
}

bool excluded_regime(double directionality, double xi) {
  if (directionality != 0.0) return false;
  return std::abs(xi) < 1e-12 || std::abs(xi - std::numbers::pi) < 1e-12;
}

BoundaryCell classify_cell(const SystemParams& base, double xi, double d,
                           double w, const ScanOptions& options,
                           const Trajectory* reference) {
  SystemParams params = base;
  params.directionality = d;
  params.xi = xi;
  params.disorder_strength = w;
  params.validate();

  Trajectory own;
  if (reference == nullptr) {
    own = reference_trajectory(params, options.ensemble);
    reference = &own;
  }
  const EnsembleOptions ens = cell_options(options, d, w);
  const EnsembleResult result = run_ensemble(params, ens);

  TransportRecord record;
  BoundaryCell cell;
  cell.directionality = d;
  cell.disorder_strength = w;
  cell.seed = ens.base_seed;
  cell.computed =
      classify_transport(result, *reference, options.edge_margin, &record);
  cell.label = excluded_regime(d, xi) ? CellLabel::Excluded
               : cell.computed == TransportPhase::Localized
                   ? CellLabel::Localized
                   : CellLabel::Delocalized;
  cell.min_site = record.min_site;
  cell.max_site = record.max_site;
  const auto ref = transport_record(reference->populations, params.start_site());
  cell.reference_min_site = ref.min_site;
  cell.reference_max_site = ref.max_site;
  cell.final_total = result.avg_total.back();
  return cell;
}

BoundaryColumn extract_boundary(double directionality,
                                std::span<const double> w_grid,
                                std::span<const CellLabel> labels) {
  if (w_grid.size() != labels.size()) {
    throw std::invalid_argument("grid and labels differ in length");
  }
  BoundaryColumn column;
  column.directionality = directionality;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == CellLabel::Excluded) continue;
    if (labels[i] == CellLabel::Localized && !column.first_localized) {
      column.first_localized = w_grid[i];
    }
    if (prev && labels[*prev] != labels[i]) {
      column.transitions.push_back(
          {w_grid[*prev], w_grid[i], labels[*prev], labels[i]});
    }
    prev = i;
  }
  return column;
}

PhaseBoundaryScan scan_phase_boundary(const SystemParams& base, double xi,
                                      std::span<const double> d_grid,
                                      std::span<const double> w_grid,
                                      const ScanOptions& options) {
  if (d_grid.empty() || w_grid.empty()) {
    throw std::invalid_argument("empty scan grid");
  }
  PhaseBoundaryScan scan;
  scan.base = base;
  scan.xi = xi;
  scan.options = options;
  scan.d_grid.assign(d_grid.begin(), d_grid.end());
  scan.w_grid.assign(w_grid.begin(), w_grid.end());
  for (double d : d_grid) {
    SystemParams params = base;
    params.directionality = d;
    params.xi = xi;
    const Trajectory reference = reference_trajectory(params, options.ensemble);
    std::vector<CellLabel> labels;
    for (double w : w_grid) {
      scan.cells.push_back(classify_cell(base, xi, d, w, options, &reference));
      labels.push_back(scan.cells.back().label);
    }
    scan.columns.push_back(extract_boundary(d, w_grid, labels));
  }
  return scan;
}

ReentrancePoint reentrance_point(const SystemParams& params, double xi,
                                 const ScanOptions& options) {
  SystemParams p = params;
  p.xi = xi;
  p.validate();
  ReentrancePoint point;
  point.xi = xi;

  const Trajectory reference = reference_trajectory(p, options.ensemble);
  const int split = resolved_split(p, options.ensemble);
  const auto [ref_a, ref_b] = entropy_series(reference, split);
  try {
    point.tail_start =
        entropy_tail_start(reference.times, ref_a, options.entropy_level);
  } catch (const NumericalError& e) {
    point.failure = e.what();
    return point;
  }
  point.tail_end = options.tail_decades > 0.0
                       ? point.tail_start * std::pow(10.0, options.tail_decades)
                       : options.ensemble.horizon;
  if (point.tail_end > options.ensemble.horizon * (1.0 + 1e-12)) {
    point.failure = "tail window ends at " + std::to_string(point.tail_end) +
                    ", beyond the horizon";
    return point;
  }
  const EnsembleResult ens = run_ensemble(
      p, cell_options(options, p.directionality, p.disorder_strength));
  point.a = exponent_ratio(ens.times, ens.avg_entropy_a, ref_a,
                           point.tail_start, point.tail_end);
  point.b = exponent_ratio(ens.times, ens.avg_entropy_b, ref_b,
                           point.tail_start, point.tail_end);
  point.ok = point.a.ok;
  point.ratio = point.a.ratio;
  if (!point.ok) {
    point.failure = !point.a.disordered.ok ? point.a.disordered.failure
                                           : point.a.reference.failure;
  }
  return point;
}

ReentranceCurve scan_reentrance(const SystemParams& params,
                                std::span<const double> xi_grid,
                                const ScanOptions& options) {
  ReentranceCurve curve;
  curve.directionality = params.directionality;
  curve.disorder_strength = params.disorder_strength;
  curve.options = options;
  for (double xi : xi_grid) {
    curve.points.push_back(reentrance_point(params, xi, options));
  }
  return curve;
}

std::string crossing_pattern(std::span<const double> ratios, double threshold) {
  std::string out;
  for (double r : ratios) {
    if (std::isnan(r)) continue;
    const char c = r < threshold ? 'L' : 'D';
    if (out.empty() || out.back() != c) out.push_back(c);
  }
  return out;
}

std::string crossing_pattern(const ReentranceCurve& curve) {
  std::vector<double> ratios;
  for (const auto& p : curve.points) {
    ratios.push_back(p.ok ? p.ratio : std::nan(""));
  }
  return crossing_pattern(ratios, curve.threshold);
}

LocalizationFit fit_profile(const EnsembleResult& ensemble, double t) {
  const auto profile = profile_at(ensemble.times, ensemble.avg_populations, t);
  return localization_fit(profile, ensemble.params.start_site());
}

LocalizationLengthScan scan_localization_length(
    const SystemParams& base, double disorder_strength,
    std::span<const double> d_grid, std::span<const double> xi_set,
    const ScanOptions& options) {
  LocalizationLengthScan scan;
  scan.disorder_strength = disorder_strength;
  scan.options = options;
  const double stride = options.ensemble.stride;
  for (double xi : xi_set) {
    for (double d : d_grid) {
      SystemParams p = base;
      p.xi = xi;
      p.directionality = d;
      p.disorder_strength = disorder_strength;
      p.validate();
      ZetaPoint point;
      point.xi = xi;
      point.directionality = d;

      SystemParams clean = p;
      clean.disorder_strength = 0.0;
      PropagateOptions prop = options.ensemble.propagate;
      prop.keep_amplitudes = false;
      const Trajectory reference = propagate(
          build_coupling_matrix(clean, zero_disorder(clean.n_sites)),
          clean.start_site(), round_up_to_stride(options.search_horizon, stride),
          stride, prop);
      try {
        point.reference_time = reference_time(reference.times, reference.total,
                                              options.reference_level);
      } catch (const NumericalError& e) {
        point.failure = e.what();
        scan.points.push_back(std::move(point));
        continue;
      }
      EnsembleOptions ens = cell_options(options, d, disorder_strength);
      ens.horizon =
          std::max(stride, round_up_to_stride(point.reference_time, stride));
      const EnsembleResult result = run_ensemble(p, ens);
      point.fit = fit_profile(result, point.reference_time);
      point.ok = point.fit.ok;
      if (!point.ok) point.failure = point.fit.failure;
      scan.points.push_back(std::move(point));
    }
  }
  return scan;
}

std::vector<double> rpr_series(const Eigen::MatrixXd& averaged,
                               const Eigen::MatrixXd& reference) {
  if (averaged.rows() != reference.rows() ||
      averaged.cols() != reference.cols()) {
    throw std::invalid_argument("population grids differ in shape");
  }
  std::vector<double> out(static_cast<std::size_t>(averaged.rows()), 0.0);
  for (Eigen::Index k = 0; k < averaged.rows(); ++k) {
    if (!(averaged.row(k).sum() > 0.0) || !(reference.row(k).sum() > 0.0)) {
      continue;
    }
    const auto a = normalized(row_vector(averaged, k));
    const auto r = normalized(row_vector(reference, k));
    out[k] = relative_participation_ratio(a, r);
  }
  return out;
}

PopulationMap emit_population_map(const SystemParams& base,
                                  std::span<const double> w_list,
                                  double cut_time, const ScanOptions& options) {
  base.validate();
  if (cut_time < 0.0 || cut_time > options.ensemble.horizon) {
    throw std::invalid_argument("cut time lies outside the horizon");
  }
  PopulationMap map;
  map.base = base;
  map.options = options;
  map.cut_time = cut_time;
  map.reference = reference_trajectory(base, options.ensemble);
  const int split = resolved_split(base, options.ensemble);
  std::tie(map.reference_entropy_a, map.reference_entropy_b) =
      entropy_series(map.reference, split);
  try {
    map.reference_time = reference_time(map.reference.times,
                                        map.reference.total,
                                        options.reference_level);
  } catch (const NumericalError&) {
  }
  std::optional<double> tail;
  try {
    tail = entropy_tail_start(map.reference.times, map.reference_entropy_a,
                              options.entropy_level);
  } catch (const NumericalError&) {
  }

  // Clamped to the horizon: informational only.
  const double tail_end =
      tail && options.tail_decades > 0.0
          ? std::min(*tail * std::pow(10.0, options.tail_decades),
                     options.ensemble.horizon)
          : options.ensemble.horizon;

  for (double w : w_list) {
    SystemParams p = base;
    p.disorder_strength = w;
    PopulationPanel panel;
    panel.disorder_strength = w;
    panel.ensemble =
        run_ensemble(p, cell_options(options, base.directionality, w));
    panel.cut = profile_at(panel.ensemble.times,
                           panel.ensemble.avg_populations, cut_time);
    panel.fit = localization_fit(panel.cut, p.start_site());
    panel.phase = classify_transport(panel.ensemble, map.reference,
                                     options.edge_margin, &panel.transport);
    panel.rpr = rpr_series(panel.ensemble.avg_populations,
                           map.reference.populations);
    if (tail) {
      panel.entropy_exponents =
          exponent_ratio(panel.ensemble.times, panel.ensemble.avg_entropy_a,
                         map.reference_entropy_a, *tail, tail_end);
    }
    map.panels.push_back(std::move(panel));
  }
  return map;
}

}  // namespace chiralloc
