#include "chiralloc/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "chiralloc/error.hpp"

namespace chiralloc {

namespace {

int start_index(int initial_site, int n) {
  if (initial_site < 1 || initial_site > n) {
    throw std::invalid_argument("initial_site " + std::to_string(initial_site) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  return initial_site - 1;
}

double generator_norm(const Eigen::MatrixXcd& m) {
  const double col = m.cwiseAbs().colwise().sum().maxCoeff();
  const double row = m.cwiseAbs().rowwise().sum().maxCoeff();
  return std::max(col, row);
}

// One RK4 step for a linear autonomous system is multiplication by the
// degree-4 Taylor polynomial of exp(hM).
Eigen::MatrixXcd rk4_polynomial(const Eigen::MatrixXcd& m, double h) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd a = h * m;
  Eigen::MatrixXcd p = id + a / 4.0;
  p = id + (a / 3.0) * p;
  p = id + (a / 2.0) * p;
  p = id + a * p;
  return p;
}

Eigen::MatrixXcd matrix_power(Eigen::MatrixXcd base, long long exponent) {
  Eigen::MatrixXcd result =
      Eigen::MatrixXcd::Identity(base.rows(), base.cols());
  bool first = true;
  while (exponent > 0) {
    if (exponent & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = (result * base).eval();
      }
    }
    exponent >>= 1;
    if (exponent > 0) base = (base * base).eval();
  }
  return result;
}

void record(Trajectory& traj, int k, const Eigen::VectorXcd& a,
            bool keep_amplitudes) {
  if (keep_amplitudes) traj.amplitudes.row(k) = a.transpose();
  traj.populations.row(k) = a.cwiseAbs2().transpose();
  traj.total[k] = traj.populations.row(k).sum();
}

Trajectory make_trajectory(std::vector<double> times, int n, bool amplitudes) {
  Trajectory traj;
  const auto k = static_cast<Eigen::Index>(times.size());
  traj.times = std::move(times);
  if (amplitudes) traj.amplitudes.resize(k, n);
  traj.populations.resize(k, n);
  traj.total.assign(static_cast<std::size_t>(k), 0.0);
  return traj;
}

}  // namespace

std::vector<double> snapshot_grid(double horizon, double stride) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive");
  }
  if (!(stride > 0.0) || stride > horizon) {
    throw std::invalid_argument("stride must lie in (0, horizon]");
  }
  const double ratio = horizon / stride;
  const double count = std::round(ratio);
  if (std::abs(ratio - count) > 1e-9 * count) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) +
                                " is not a multiple of stride " +
                                std::to_string(stride));
  }
  std::vector<double> times(static_cast<std::size_t>(count) + 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = static_cast<double>(k) * stride;
  }
  return times;
}

double integrator_step(const Eigen::MatrixXcd& matrix,
                       const PropagateOptions& options) {
  if (!(options.max_step > 0.0) || !(options.tolerance > 0.0)) {
    throw std::invalid_argument("max_step and tolerance must be positive");
  }
  const double norm = generator_norm(matrix);
  double h = options.max_step;
  if (norm > 0.0) {
    // RK4 local error ~ (h |M|)^5 / 120 per step, i.e. that over h per unit
    // time.
    const double h_tol =
        std::pow(120.0 * options.tolerance / std::pow(norm, 5.0), 0.25);
    h = std::min(h, h_tol);
  }
  if (!std::isfinite(h) || h < options.min_step) {
    throw NumericalError("step-size underflow: step " + std::to_string(h) +
                             " below minimum at t = 0",
                         0.0);
  }
  return h;
}

Trajectory propagate(const CouplingMatrix& matrix, int initial_site,
                     double horizon, double stride,
                     const PropagateOptions& options) {
  const Eigen::MatrixXcd& m = matrix.entries();
  const int n = matrix.size();
  const int c = start_index(initial_site, n);
  auto times = snapshot_grid(horizon, stride);
  const double h_max = integrator_step(m, options);
  const auto substeps = static_cast<long long>(std::ceil(stride / h_max - 1e-9));
  const double h = stride / static_cast<double>(substeps);

  Trajectory traj = make_trajectory(std::move(times), n, options.keep_amplitudes);
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n);
  a(c) = 1.0;
  record(traj, 0, a, options.keep_amplitudes);

  const int snapshots = traj.snapshots();
  if (options.mode == StepMode::StridePropagator) {
    const Eigen::MatrixXcd stride_map =
        matrix_power(rk4_polynomial(m, h), substeps);
    Eigen::VectorXcd next(n);
    for (int k = 1; k < snapshots; ++k) {
      next.noalias() = stride_map * a;
      a.swap(next);
      if (!a.allFinite()) {
        throw NumericalError("non-finite amplitudes at t = " +
                                 std::to_string(traj.times[k]),
                             traj.times[k]);
      }
      record(traj, k, a, options.keep_amplitudes);
    }
    return traj;
  }

  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n);
  for (int k = 1; k < snapshots; ++k) {
    for (long long s = 0; s < substeps; ++s) {
      k1.noalias() = m * a;
      k2.noalias() = m * (a + (h / 2.0) * k1);
      k3.noalias() = m * (a + (h / 2.0) * k2);
      k4.noalias() = m * (a + h * k3);
      a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!a.allFinite()) {
      throw NumericalError("non-finite amplitudes at t = " +
                               std::to_string(traj.times[k]),
                           traj.times[k]);
    }
    record(traj, k, a, options.keep_amplitudes);
  }
  return traj;
}

Trajectory propagate_expm(const CouplingMatrix& matrix, int initial_site,
                          std::span<const double> times) {
  const int n = matrix.size();
  const int c = start_index(initial_site, n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1])) {
      throw std::invalid_argument("times must be nonnegative and nondecreasing");
    }
  }
  Trajectory traj =
      make_trajectory(std::vector<double>(times.begin(), times.end()), n, true);
  for (int k = 0; k < traj.snapshots(); ++k) {
    const double t = traj.times[k];
    Eigen::VectorXcd a;
    if (t == 0.0) {
      a = Eigen::VectorXcd::Zero(n);
      a(c) = 1.0;
    } else {
      const Eigen::MatrixXcd scaled = matrix.entries() * t;
      const Eigen::MatrixXcd e = scaled.exp();
      a = e.col(c);
    }
    if (!a.allFinite()) {
      throw NumericalError("matrix exponential overflow at t = " +
                               std::to_string(t),
                           t);
    }
    record(traj, k, a, true);
  }
  return traj;
}

Trajectory cascaded_solution(const SystemParams& params,
                             const DisorderRealization& disorder,
                             std::span<const double> times) {
  params.validate();
  if (params.directionality != 1.0) {
    throw std::invalid_argument(
        "cascaded_solution requires directionality == 1");
  }
  if (params.disorder_mode != DisorderMode::PhaseFactor) {
    throw std::invalid_argument(
        "cascaded_solution requires phase-factor disorder");
  }
  const int n = params.n_sites;
  if (static_cast<int>(disorder.phases.size()) != n) {
    throw std::invalid_argument("disorder size does not match n_sites");
  }
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("times must be nonnegative");
  }
  const int c = params.start_site() - 1;
  const int downstream = n - 1 - c;
  const auto& w = disorder.phases;

  // Gauge and propagation phases: a_{c+k} carries exp(-i[k xi + W_{c+k} - W_c]).
  std::vector<Complex> phase(static_cast<std::size_t>(downstream) + 1);
  for (int k = 0; k <= downstream; ++k) {
    phase[k] = std::polar(1.0, -(k * params.xi + (w[c + k] - w[c])));
  }

  Trajectory traj =
      make_trajectory(std::vector<double>(times.begin(), times.end()), n, true);
  traj.amplitudes.setZero();
  constexpr double kRescale = 1e200;
  const double log_rescale = std::log(kRescale);
  for (int s = 0; s < traj.snapshots(); ++s) {
    const double t = traj.times[s];
    const double x = params.gamma * t;
    const double decay = (params.gamma + params.gamma_nr) * t / 2.0;
    auto scaled = [&](double value, double log_scale) {
      if (value == 0.0) return 0.0;
      return std::copysign(std::exp(std::log(std::abs(value)) + log_scale - decay),
                           value);
    };
    traj.amplitudes(s, c) = std::exp(-decay) * phase[0];
    // L_0^{(-1)} = 1, L_1^{(-1)} = -x,
    // (k + 1) L_{k+1} = (2k - x) L_k - (k - 1) L_{k-1}.
    double prev = 1.0;
    double cur = -x;
    double log_scale = 0.0;
    for (int k = 1; k <= downstream; ++k) {
      traj.amplitudes(s, c + k) = scaled(cur, log_scale) * phase[k];
      const double next = ((2.0 * k - x) * cur - (k - 1.0) * prev) / (k + 1.0);
      prev = cur;
      cur = next;
      if (std::abs(cur) > kRescale) {
        prev /= kRescale;
        cur /= kRescale;
        log_scale += log_rescale;
      }
    }
  }
  fill_populations(traj);
  return traj;
}

void fill_populations(Trajectory& trajectory) {
  trajectory.populations = trajectory.amplitudes.cwiseAbs2();
  trajectory.total.resize(trajectory.times.size());
  for (int k = 0; k < trajectory.snapshots(); ++k) {
    trajectory.total[k] = trajectory.populations.row(k).sum();
  }
}

}  // namespace chiralloc
