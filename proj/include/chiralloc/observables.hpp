#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "chiralloc/model.hpp"

namespace chiralloc {

// Exponential fit P_n ~ A exp(-|n - n_c| / n_L) of a site profile.
struct LocalizationFit {
  bool ok = false;
  std::string failure;  // reason when !ok
  double n_l = 0.0;      // localization length in sites
  double zeta_l = 0.0;   // 2 n_L ln 2
  double amplitude = 0.0;
  double r_squared = 0.0;
  int first_site = 0;    // 1-based bounds of the sites that entered the fit
  int last_site = 0;
  int points = 0;
};

// Least squares of ln P_n against |n - center| over sites with
// P_n >= floor_ratio * max P, excluding the centre site. Never throws on a
// degenerate profile; returns ok == false instead.
LocalizationFit localization_fit(std::span<const double> profile, int center,
                                 double floor_ratio = 1e-8);

// profile / sum(profile).
std::vector<double> normalized(std::span<const double> profile);

// Participation ratio (sum d)^2 / sum d^2 of the positive part
// d_n = max(avg_n - ref_n, 0). Both inputs must sum to 1 within 1e-9.
// Returns 0 when every d_n vanishes.
double relative_participation_ratio(std::span<const double> avg_profile,
                                    std::span<const double> ref_profile);

// -p ln p - (1 - p) ln(1 - p), with 0 ln 0 = 0.
double binary_entropy(double p);

struct EntropyPair {
  double a = 0.0;  // nats
  double b = 0.0;
};

// Bipartite von Neumann entropies of the single-excitation state (plus the
// vacuum that carries the decayed weight). `split` is the last 1-based site
// of block A; B is split+1..N.
EntropyPair entropy_bipartite(std::span<const Complex> amplitudes, int split);
EntropyPair entropy_bipartite(const Eigen::VectorXcd& amplitudes, int split);

// Default split: A = 1..ceil(N/2).
inline int default_split(int n_sites) { return (n_sites + 1) / 2; }

// S(t) ~ c t^{-beta} fitted by unweighted least squares in log-log space.
struct PowerLawFit {
  bool ok = false;
  std::string failure;
  double beta = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

PowerLawFit powerlaw_exponent(std::span<const double> times,
                              std::span<const double> series, double t_start,
                              double floor = 1e-12, int min_points = 8,
                              double t_end = std::numeric_limits<double>::infinity());

struct ExponentRatio {
  bool ok = false;
  PowerLawFit disordered;
  PowerLawFit reference;
  double ratio = 0.0;  // beta_w / beta_0
};

// Fits both series over the same window [t_start, t_end].
ExponentRatio exponent_ratio(
    std::span<const double> times, std::span<const double> disordered,
    std::span<const double> reference, double t_start,
    double t_end = std::numeric_limits<double>::infinity());

// First time the total population drops below `level`, linearly interpolated
// between snapshots. level >= P_t(0) gives the first snapshot time. Throws
// NumericalError when no crossing happens within the grid.
double reference_time(std::span<const double> times,
                      std::span<const double> total, double level);

// Start of the entropy tail: first time after the peak of the reference
// entropy at which it falls to `level` or below. Throws NumericalError when
// the reference never does so.
double entropy_tail_start(std::span<const double> times,
                          std::span<const double> reference_entropy,
                          double level);

// Linear interpolation of a snapshot grid (rows = times) at time t.
std::vector<double> profile_at(std::span<const double> times,
                               const Eigen::MatrixXd& grid, double t);

enum class TransportPhase { Localized, Delocalized };
std::string_view to_string(TransportPhase phase);

struct TransportRecord {
  std::vector<int> argmax_sites;  // 1-based, one per snapshot
  int min_site = 0;
  int max_site = 0;
  int max_excursion = 0;
  bool reached_edge = false;  // set by classify_transport
};

// Per-snapshot site of maximal population (lowest site on ties).
TransportRecord transport_record(const Eigen::MatrixXd& populations,
                                 int center);

// Localized when the argmax of the averaged populations never gets within
// `edge_margin` sites of the extreme site the reference argmax reached.
TransportPhase classify_transport(const Eigen::MatrixXd& avg_populations,
                                  const Eigen::MatrixXd& ref_populations,
                                  int center, int edge_margin = 2,
                                  TransportRecord* record = nullptr);

}  // namespace chiralloc
