#include "chiralloc/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chiralloc/error.hpp"
#include "chiralloc/parallel.hpp"
#include "chiralloc/rng.hpp"

namespace chiralloc {

namespace {

// Realizations computed between two reductions. Fixed, so the batch layout
// never depends on the worker count.
constexpr std::size_t kBatch = 64;

EnsembleSum leaf(std::size_t index, RealizationSample&& s) {
  EnsembleSum out;
  out.begin = index;
  out.count = 1;
  out.populations = std::move(s.populations);
  out.total = std::move(s.total);
  out.entropy_a = std::move(s.entropy_a);
  out.entropy_b = std::move(s.entropy_b);
  return out;
}

// In-order pairwise summation: equal-sized neighbours merge as soon as both
// exist (a binary counter), the leftovers fold right to left at the end.
class PairwiseReducer {
 public:
  void push(EnsembleSum node) {
    stack_.push_back(std::move(node));
    while (stack_.size() >= 2 &&
           stack_[stack_.size() - 1].count == stack_[stack_.size() - 2].count) {
      EnsembleSum right = std::move(stack_.back());
      stack_.pop_back();
      stack_.back() = merge(stack_.back(), right);
    }
  }

  EnsembleSum finish() {
    if (stack_.empty()) throw std::logic_error("empty reduction");
    EnsembleSum acc = std::move(stack_.back());
    stack_.pop_back();
    while (!stack_.empty()) {
      acc = merge(stack_.back(), acc);
      stack_.pop_back();
    }
    return acc;
  }

 private:
  std::vector<EnsembleSum> stack_;
};

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

EnsembleSum merge(const EnsembleSum& left, const EnsembleSum& right) {
  if (left.begin + left.count != right.begin) {
    throw std::invalid_argument("ensemble sums are not adjacent");
  }
  EnsembleSum out;
  out.begin = left.begin;
  out.count = left.count + right.count;
  out.populations = left.populations + right.populations;
  out.total = left.total + right.total;
  out.entropy_a = left.entropy_a + right.entropy_a;
  out.entropy_b = left.entropy_b + right.entropy_b;
  return out;
}

int resolved_split(const SystemParams& params, const EnsembleOptions& options) {
  return options.split > 0 ? options.split : default_split(params.n_sites);
}

DisorderRealization realization_disorder(const SystemParams& params,
                                         const EnsembleOptions& options,
                                         std::size_t index) {
  auto disorder = sample_disorder(
      params, rng::realization_seed(options.base_seed, index));
  return options.mirror_disorder ? mirrored(std::move(disorder)) : disorder;
}

std::pair<std::vector<double>, std::vector<double>> entropy_series(
    const Trajectory& trajectory, int split) {
  if (trajectory.amplitudes.rows() != trajectory.snapshots()) {
    throw std::invalid_argument("trajectory has no stored amplitudes");
  }
  std::vector<double> a(trajectory.times.size()), b(trajectory.times.size());
  Eigen::VectorXcd row;
  for (int k = 0; k < trajectory.snapshots(); ++k) {
    row = trajectory.amplitudes.row(k).transpose();
    const auto s = entropy_bipartite(row, split);
    a[k] = s.a;
    b[k] = s.b;
  }
  return {std::move(a), std::move(b)};
}

RealizationSample simulate_realization(const SystemParams& params,
                                       const EnsembleOptions& options,
                                       std::size_t index) {
  const auto disorder = realization_disorder(params, options, index);
  const auto matrix = build_coupling_matrix(params, disorder);
  PropagateOptions prop = options.propagate;
  prop.keep_amplitudes = true;
  Trajectory traj = propagate(matrix, params.start_site(), options.horizon,
                              options.stride, prop);
  auto [sa, sb] = entropy_series(traj, resolved_split(params, options));
  RealizationSample out;
  out.seed = disorder.seed;
  out.populations = std::move(traj.populations);
  out.total = Eigen::Map<const Eigen::VectorXd>(
      traj.total.data(), static_cast<Eigen::Index>(traj.total.size()));
  out.entropy_a = Eigen::Map<const Eigen::VectorXd>(
      sa.data(), static_cast<Eigen::Index>(sa.size()));
  out.entropy_b = Eigen::Map<const Eigen::VectorXd>(
      sb.data(), static_cast<Eigen::Index>(sb.size()));
  return out;
}

EnsembleSum sum_realizations(const SystemParams& params,
                             const EnsembleOptions& options, std::size_t begin,
                             std::size_t end) {
  params.validate();
  if (end <= begin) throw std::invalid_argument("empty realization range");
  const unsigned workers = resolve_workers(options.workers);
  PairwiseReducer reducer;
  std::vector<RealizationSample> slots(std::min(kBatch, end - begin));
  for (std::size_t batch = begin; batch < end; batch += kBatch) {
    const std::size_t stop = std::min(end, batch + kBatch);
    parallel_for(
        batch, stop, workers,
        [&](std::size_t r) {
          slots[r - batch] = simulate_realization(params, options, r);
        },
        [](std::size_t r, std::exception_ptr e) {
          try {
            std::rethrow_exception(e);
          } catch (const std::exception& ex) {
            throw EnsembleError(r, ex.what());
          }
        });
    for (std::size_t r = batch; r < stop; ++r) {
      reducer.push(leaf(r, std::move(slots[r - batch])));
    }
  }
  return reducer.finish();
}

EnsembleResult finalize(const SystemParams& params,
                        const EnsembleOptions& options, const EnsembleSum& sum) {
  EnsembleResult out;
  out.params = params;
  out.realization_count = static_cast<int>(sum.count);
  out.base_seed = options.base_seed;
  out.mirror_disorder = options.mirror_disorder;
  out.split = resolved_split(params, options);
  out.times = snapshot_grid(options.horizon, options.stride);
  const double inv = 1.0 / static_cast<double>(sum.count);
  out.avg_populations = sum.populations * inv;
  out.avg_total = to_vector(sum.total * inv);
  out.avg_entropy_a = to_vector(sum.entropy_a * inv);
  out.avg_entropy_b = to_vector(sum.entropy_b * inv);
  return out;
}

EnsembleResult run_ensemble(const SystemParams& params,
                            const EnsembleOptions& options) {
  params.validate();
  if (options.realizations < 1) {
    throw std::invalid_argument("realizations must be >= 1");
  }
  if (params.disorder_strength == 0.0) {
    EnsembleSum single = leaf(0, simulate_realization(params, options, 0));
    EnsembleResult out = finalize(params, options, single);
    out.realization_count = options.realizations;
    return out;
  }
  return finalize(params, options,
                  sum_realizations(params, options, 0,
                                   static_cast<std::size_t>(options.realizations)));
}

Trajectory reference_trajectory(const SystemParams& params,
                                const EnsembleOptions& options) {
  SystemParams clean = params;
  clean.disorder_strength = 0.0;
  const auto matrix = build_coupling_matrix(clean, zero_disorder(clean.n_sites));
  PropagateOptions prop = options.propagate;
  prop.keep_amplitudes = true;
  return propagate(matrix, clean.start_site(), options.horizon, options.stride,
                   prop);
}

ConvergenceReport convergence_check(const SystemParams& params, int r_small,
                                    int r_large, const EnsembleOptions& options) {
  if (r_small < 1 || r_large < r_small) {
    throw std::invalid_argument("need 1 <= r_small <= r_large");
  }
  EnsembleOptions small = options;
  small.realizations = r_small;
  EnsembleOptions large = options;
  large.realizations = r_large;
  const auto a = run_ensemble(params, small);
  const auto b = r_small == r_large ? a : run_ensemble(params, large);
  ConvergenceReport out;
  out.r_small = r_small;
  out.r_large = r_large;
  for (std::size_t k = 0; k < a.avg_total.size(); ++k) {
    const double diff = std::abs(a.avg_total[k] - b.avg_total[k]);
    double rel = 0.0;
    if (diff > 0.0) {
      rel = b.avg_total[k] > 0.0 ? diff / b.avg_total[k]
                                 : std::numeric_limits<double>::infinity();
    }
    if (rel > out.deviation) {
      out.deviation = rel;
      out.worst_time = a.times[k];
    }
  }
  out.pass = out.deviation <= kConvergenceThreshold;
  return out;
}

TransportPhase classify_transport(const EnsembleResult& ensemble,
                                  const Trajectory& reference, int edge_margin,
                                  TransportRecord* record) {
  if (ensemble.times != reference.times) {
    throw std::invalid_argument("ensemble and reference grids differ");
  }
  return classify_transport(ensemble.avg_populations, reference.populations,
                            ensemble.params.start_site(), edge_margin, record);
}

}  // namespace chiralloc
