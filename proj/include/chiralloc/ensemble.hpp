#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chiralloc/dynamics.hpp"
#include "chiralloc/model.hpp"
#include "chiralloc/observables.hpp"

namespace chiralloc {

struct EnsembleOptions {
  int realizations = 200;
  double horizon = 1500.0;
  double stride = 1.0;
  std::uint64_t base_seed = 1;
  // 0: CHIRALLOC_WORKERS or hardware concurrency.
  int workers = 0;
  // Negate every sampled phase (W -> -W). Used to pair xi with pi - xi.
  bool mirror_disorder = false;
  // Last site of entropy block A; 0 selects ceil(N/2).
  int split = 0;
  PropagateOptions propagate;
};

// Human-readable statement of how realization seeds are derived.
inline constexpr const char* kSeedRule =
    "realization r uses keyed(mix64(base_seed), r); site mu draws "
    "u = keyed(realization_seed, mu) >> 11 * 2^-53, W = pi w (2u - 1)";

// Per-realization observables kept after the amplitudes are dropped.
struct RealizationSample {
  std::uint64_t seed = 0;
  Eigen::MatrixXd populations;  // rows = snapshots
  Eigen::VectorXd total;
  Eigen::VectorXd entropy_a;
  Eigen::VectorXd entropy_b;
};

// Unnormalized sums over a contiguous block of realizations.
struct EnsembleSum {
  std::size_t begin = 0;
  std::size_t count = 0;
  Eigen::MatrixXd populations;
  Eigen::VectorXd total;
  Eigen::VectorXd entropy_a;
  Eigen::VectorXd entropy_b;
};

// left must end where right begins. Elementwise left + right.
EnsembleSum merge(const EnsembleSum& left, const EnsembleSum& right);

struct EnsembleResult {
  SystemParams params;
  int realization_count = 0;
  std::uint64_t base_seed = 0;
  bool mirror_disorder = false;
  std::string seed_rule = kSeedRule;
  int split = 0;
  std::vector<double> times;
  Eigen::MatrixXd avg_populations;  // rows = snapshots, cols = sites
  std::vector<double> avg_total;
  std::vector<double> avg_entropy_a;
  std::vector<double> avg_entropy_b;
  // Filled by convergence_check; negative when not measured.
  double convergence = -1.0;
};

int resolved_split(const SystemParams& params, const EnsembleOptions& options);

// Disorder of realization `index` under `options`.
DisorderRealization realization_disorder(const SystemParams& params,
                                         const EnsembleOptions& options,
                                         std::size_t index);

RealizationSample simulate_realization(const SystemParams& params,
                                       const EnsembleOptions& options,
                                       std::size_t index);

// Sums realizations [begin, end) with a fixed pairwise reduction tree that
// depends only on the index range, so the bits do not depend on the worker
// count. Realizations run in parallel in fixed-size batches.
EnsembleSum sum_realizations(const SystemParams& params,
                             const EnsembleOptions& options, std::size_t begin,
                             std::size_t end);

EnsembleResult finalize(const SystemParams& params,
                        const EnsembleOptions& options, const EnsembleSum& sum);

// Averages options.realizations realizations. With zero disorder strength a
// single deterministic trajectory is computed and reported as the average.
EnsembleResult run_ensemble(const SystemParams& params,
                            const EnsembleOptions& options);

// Disorder-free trajectory on the ensemble grid (amplitudes kept).
Trajectory reference_trajectory(const SystemParams& params,
                                const EnsembleOptions& options);

// S_A(t), S_B(t) of one trajectory.
std::pair<std::vector<double>, std::vector<double>> entropy_series(
    const Trajectory& trajectory, int split);

struct ConvergenceReport {
  double deviation = 0.0;  // max_t |<P_t>_small - <P_t>_large| / <P_t>_large
  double worst_time = 0.0;
  bool pass = false;       // deviation <= 0.02
  int r_small = 0;
  int r_large = 0;
};

inline constexpr double kConvergenceThreshold = 0.02;

ConvergenceReport convergence_check(const SystemParams& params, int r_small,
                                    int r_large, const EnsembleOptions& options);

// Same as the grid overload, with the ensemble average against a reference.
TransportPhase classify_transport(const EnsembleResult& ensemble,
                                  const Trajectory& reference,
                                  int edge_margin = 2,
                                  TransportRecord* record = nullptr);

}  // namespace chiralloc
