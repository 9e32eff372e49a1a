#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chiralloc/model.hpp"

namespace chiralloc {

// Snapshots of the amplitude vector on a time grid.
//
// Row k of `amplitudes` / `populations` belongs to times[k]; columns are
// sites 1..N in order. `total[k]` is the sum of row k of `populations`.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXcd amplitudes;
  Eigen::MatrixXd populations;
  std::vector<double> total;

  int snapshots() const noexcept { return static_cast<int>(times.size()); }
  int sites() const noexcept { return static_cast<int>(populations.cols()); }
};

enum class StepMode {
  // Precompute the RK4 update polynomial for one step, raise it to the number
  // of steps per snapshot and apply one matrix-vector product per snapshot.
  // Algebraically identical to stepping, much cheaper on long horizons.
  StridePropagator,
  // Classical k1..k4 stepping, one step at a time.
  Stepwise,
};

struct PropagateOptions {
  // Upper bound on the RK4 step (units of 1/gamma).
  double max_step = 5e-3;
  // Target local error per unit time. The step is shrunk below max_step when
  // the norm of the generator makes max_step too coarse for this target.
  double tolerance = 1e-9;
  StepMode mode = StepMode::StridePropagator;
  // Smallest step we accept before reporting stiffness.
  double min_step = 1e-10;
  // Drop the complex amplitudes after computing populations.
  bool keep_amplitudes = true;
};

// Snapshot grid 0, stride, 2 stride, ..., horizon. The horizon must be an
// integer multiple of the stride (to 1e-9 relative).
std::vector<double> snapshot_grid(double horizon, double stride);

// RK4 step actually used for `matrix` under `options`.
double integrator_step(const Eigen::MatrixXcd& matrix,
                       const PropagateOptions& options);

// Integrates da/dt = M a from a_mu(0) = delta(mu, initial_site) (1-based) and
// records snapshots every `stride` up to `horizon`.
Trajectory propagate(const CouplingMatrix& matrix, int initial_site,
                     double horizon, double stride,
                     const PropagateOptions& options = {});

// a(t) = exp(M t) a(0) for each requested time, by scaling and squaring.
// Independent of `propagate`; used to cross-check it.
Trajectory propagate_expm(const CouplingMatrix& matrix, int initial_site,
                          std::span<const double> times);

// Closed-form cascaded (D = 1) solution in the phase-factor gauge.
//
// Downstream of the start site the amplitudes follow from the lower
// triangular recursion; each iterated time integral is evaluated exactly,
// which reduces to generalized Laguerre polynomials L_k^{(-1)}(gamma t).
// Throws std::invalid_argument unless directionality == 1 and the disorder
// enters as phase factors.
Trajectory cascaded_solution(const SystemParams& params,
                             const DisorderRealization& disorder,
                             std::span<const double> times);

// Fills populations and total from amplitudes.
void fill_populations(Trajectory& trajectory);

}  // namespace chiralloc
