#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chiralloc/ensemble.hpp"
#include "chiralloc/observables.hpp"

namespace chiralloc {

struct ScanOptions {
  // Realization count, horizon, stride, base seed, workers, integrator.
  EnsembleOptions ensemble;
  int edge_margin = 2;
  // P_t(w = 0) level that defines the reference time of a profile.
  double reference_level = 0.1;
  // Reference entropy level after which the entropy tail is fitted.
  double entropy_level = 0.1;
  // Tail window [t_s, t_s 10^tail_decades]; 0 fits up to the horizon.
  double tail_decades = 1.0;
  // Longest disorder-free run used to locate the reference time.
  double search_horizon = 20000.0;
};

// Seed of one (D, w) cell. Depends on the cell coordinates only, so any cell
// can be recomputed alone and scans at xi and pi - xi share realizations.
std::uint64_t cell_seed(std::uint64_t base_seed, double directionality,
                        double disorder_strength);

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> logspace(double lo, double hi, int count);

enum class CellLabel { Localized, Delocalized, Excluded };
std::string_view to_string(CellLabel label);

// D = 0 with xi in {0, pi}: decoherence-free modes trap the excitation even
// without disorder.
bool excluded_regime(double directionality, double xi);

struct BoundaryCell {
  double directionality = 0.0;
  double disorder_strength = 0.0;
  CellLabel label = CellLabel::Delocalized;
  // What the transport criterion said, also for excluded cells.
  TransportPhase computed = TransportPhase::Delocalized;
  std::uint64_t seed = 0;
  int min_site = 0;
  int max_site = 0;
  int reference_min_site = 0;
  int reference_max_site = 0;
  double final_total = 0.0;
};

struct Transition {
  double w_below = 0.0;  // last w with label `from`
  double w_above = 0.0;  // first w with label `to`
  CellLabel from = CellLabel::Delocalized;
  CellLabel to = CellLabel::Localized;
};

struct BoundaryColumn {
  double directionality = 0.0;
  std::optional<double> first_localized;  // smallest w labelled Localized
  std::vector<Transition> transitions;    // along increasing w
};

struct PhaseBoundaryScan {
  SystemParams base;
  double xi = 0.0;
  ScanOptions options;
  std::vector<double> d_grid;
  std::vector<double> w_grid;
  std::vector<BoundaryCell> cells;  // d-major, w-minor
  std::vector<BoundaryColumn> columns;
};

BoundaryCell classify_cell(const SystemParams& base, double xi, double d,
                           double w, const ScanOptions& options,
                           const Trajectory* reference = nullptr);

PhaseBoundaryScan scan_phase_boundary(const SystemParams& base, double xi,
                                      std::span<const double> d_grid,
                                      std::span<const double> w_grid,
                                      const ScanOptions& options);

// Transition intervals of one column of labels sorted by w (Excluded cells
// are skipped).
BoundaryColumn extract_boundary(double directionality,
                                std::span<const double> w_grid,
                                std::span<const CellLabel> labels);

struct ReentrancePoint {
  double xi = 0.0;
  bool ok = false;
  std::string failure;
  double tail_start = 0.0;
  double tail_end = 0.0;
  // Block A entropies (primary) and block B entropies.
  ExponentRatio a;
  ExponentRatio b;
  double ratio = 0.0;  // a.ratio
};

struct ReentranceCurve {
  double directionality = 0.0;
  double disorder_strength = 0.0;
  double threshold = 0.5;
  ScanOptions options;
  std::vector<ReentrancePoint> points;
};

ReentrancePoint reentrance_point(const SystemParams& params, double xi,
                                 const ScanOptions& options);

// For each xi: ensemble-averaged entropy tails against the disorder-free
// tails on the window that starts where the reference entropy falls to
// options.entropy_level. A point fails when its window does not fit in the
// horizon.
ReentranceCurve scan_reentrance(const SystemParams& params,
                                std::span<const double> xi_grid,
                                const ScanOptions& options);

// Collapsed sequence of 'L' (ratio < threshold) and 'D' (ratio >= threshold)
// over the successful points, e.g. "LDL".
std::string crossing_pattern(const ReentranceCurve& curve);
std::string crossing_pattern(std::span<const double> ratios, double threshold);

struct ZetaPoint {
  double xi = 0.0;
  double directionality = 0.0;
  bool ok = false;
  std::string failure;
  double reference_time = 0.0;
  LocalizationFit fit;
};

struct LocalizationLengthScan {
  double disorder_strength = 0.0;
  ScanOptions options;
  std::vector<ZetaPoint> points;  // xi-major, D-minor
};

// Localization length at the time the disorder-free total population falls to
// options.reference_level, for every (xi, D).
LocalizationLengthScan scan_localization_length(
    const SystemParams& base, double disorder_strength,
    std::span<const double> d_grid, std::span<const double> xi_set,
    const ScanOptions& options);

// Ensemble profile at time t fitted by an exponential around the start site.
LocalizationFit fit_profile(const EnsembleResult& ensemble, double t);

struct PopulationPanel {
  double disorder_strength = 0.0;
  EnsembleResult ensemble;
  std::vector<double> cut;  // <P_n> at the cut time
  LocalizationFit fit;      // of the cut
  TransportPhase phase = TransportPhase::Delocalized;
  TransportRecord transport;
  std::vector<double> rpr;  // relative participation ratio per snapshot
  ExponentRatio entropy_exponents;  // block A, NaN-free only when ok
};

struct PopulationMap {
  SystemParams base;
  ScanOptions options;
  double cut_time = 0.0;
  Trajectory reference;  // w = 0
  std::vector<double> reference_entropy_a;
  std::vector<double> reference_entropy_b;
  std::optional<double> reference_time;  // P_t(w = 0) = reference_level
  std::vector<PopulationPanel> panels;
};

// rPR(t) of an averaged grid against a reference grid, snapshot by snapshot.
// Snapshots where either profile has no weight give 0.
std::vector<double> rpr_series(const Eigen::MatrixXd& averaged,
                               const Eigen::MatrixXd& reference);

PopulationMap emit_population_map(const SystemParams& base,
                                  std::span<const double> w_list,
                                  double cut_time, const ScanOptions& options);

}  // namespace chiralloc
