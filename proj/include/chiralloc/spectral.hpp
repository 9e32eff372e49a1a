#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "chiralloc/model.hpp"

namespace chiralloc {

// Eigenvalues of a dense complex generator with a per-eigenvalue backward
// error: residual_k = |M v_k - lambda_k v_k| / (|v_k| |M|_F).
struct Spectrum {
  Eigen::VectorXcd values;
  Eigen::VectorXd residuals;
  double max_residual = 0.0;
  // |sum(lambda) - trace(M)|
  double trace_error = 0.0;
};

// Throws NumericalError when the solver does not converge, when any residual
// exceeds `residual_bound`, or when the trace identity fails by more than
// 1e-8 N.
Spectrum eigenvalues(const Eigen::MatrixXcd& matrix,
                     double residual_bound = 1e-8);
Spectrum eigenvalues(const CouplingMatrix& matrix,
                     double residual_bound = 1e-8);

// Which real parts the level statistics are taken from.
//  EffectiveHamiltonian: energies E = i lambda of H_eff = i M (the dynamics
//    read da/dt = -i H_eff a), so Re E = -Im lambda. Default.
//  Generator: Re lambda of M itself, i.e. minus half the decay rates.
enum class GapConvention { EffectiveHamiltonian, Generator };

std::string_view to_string(GapConvention convention);

// Levels whose real parts enter the gap statistics.
Eigen::VectorXcd levels(const Eigen::VectorXcd& eigenvalues,
                        GapConvention convention);

// Adjacent-gap ratios of the ascending real parts of a spectrum.
struct GapStatistics {
  std::vector<double> sorted_real_parts;
  std::vector<double> gaps;    // N - 1 entries, on the original scale
  std::vector<double> ratios;  // N - 2 entries, NaN where excluded (0/0)
  int excluded = 0;
  int used = 0;
  double r_a = 0.0;  // mean of the used ratios
  double v_i = 0.0;  // mean of r^2 minus r_a^2
};

// Gaps are compared after mapping the real parts onto [0, 1]; a gap at or
// below `tie_threshold` counts as zero and a ratio of two zero gaps is
// excluded. Throws std::invalid_argument for fewer than 3 levels and
// NumericalError when no ratio survives.
GapStatistics gap_statistics(std::span<const Complex> spectrum,
                             double tie_threshold = 1e-12);
GapStatistics gap_statistics(const Eigen::VectorXcd& spectrum,
                             double tie_threshold = 1e-12);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::vector<double> density;  // integrates to 1 over [lo, hi]

  double bin_width() const {
    return (hi - lo) / static_cast<double>(counts.size());
  }
};

// NaN entries are skipped; values outside [lo, hi] are clamped into the end
// bins.
Histogram make_histogram(std::span<const double> values, int bins,
                         double lo = 0.0, double hi = 1.0);

// Reference values of the mean gap ratio.
inline constexpr double kGoeMeanRatio = 0.53;
inline constexpr double kPoissonMeanRatio = 0.39;

struct GapReport {
  int realizations = 0;
  std::uint64_t seed = 0;
  GapConvention convention = GapConvention::EffectiveHamiltonian;
  double r_bar = 0.0;      // ensemble mean of r_a
  double v_i_mean = 0.0;   // ensemble mean of v_I
  double r_a_variance = 0.0;
  std::vector<double> r_a;  // per realization
  std::vector<double> v_i;
  // Ensemble mean of r_n for each gap index n (NaN if always excluded).
  std::vector<double> gap_means;
  Histogram gap_mean_histogram;  // pdf over n of <r_n>
  Histogram pooled_histogram;    // pdf of every individual r_n sample
  int excluded = 0;
  double max_residual = 0.0;
  double max_trace_error = 0.0;
};

// Requires directionality == 0.
GapReport ensemble_gap_report(const SystemParams& params, int realizations,
                              std::uint64_t seed, int bins = 50,
                              int workers = 0,
                              GapConvention convention =
                                  GapConvention::EffectiveHamiltonian);

}  // namespace chiralloc
