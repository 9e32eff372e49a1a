#include "chiralloc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "chiralloc/error.hpp"
#include "chiralloc/parallel.hpp"
#include "chiralloc/rng.hpp"

namespace chiralloc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Spectrum eigenvalues(const Eigen::MatrixXcd& matrix, double residual_bound) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw std::invalid_argument("eigenvalues needs a nonempty square matrix");
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("complex eigensolver did not converge");
  }
  Spectrum out;
  out.values = solver.eigenvalues();
  const Eigen::MatrixXcd& vectors = solver.eigenvectors();
  const double norm = matrix.norm();
  const Eigen::MatrixXcd r =
      matrix * vectors - vectors * out.values.asDiagonal();
  out.residuals.resize(out.values.size());
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    const double vnorm = vectors.col(k).norm();
    out.residuals(k) = r.col(k).norm() / (vnorm * (norm > 0.0 ? norm : 1.0));
  }
  out.max_residual = out.residuals.maxCoeff();
  out.trace_error = std::abs(out.values.sum() - matrix.trace());
  if (!(out.max_residual <= residual_bound)) {
    throw NumericalError("eigenvalue residual " +
                         std::to_string(out.max_residual) + " exceeds bound");
  }
  const auto n = static_cast<double>(matrix.rows());
  if (!(out.trace_error <= 1e-8 * n)) {
    throw NumericalError("eigenvalue trace identity violated by " +
                         std::to_string(out.trace_error));
  }
  return out;
}

std::string_view to_string(GapConvention convention) {
  return convention == GapConvention::Generator ? "generator"
                                                : "effective-hamiltonian";
}

Eigen::VectorXcd levels(const Eigen::VectorXcd& eigenvalues,
                        GapConvention convention) {
  if (convention == GapConvention::Generator) return eigenvalues;
  return eigenvalues * Complex(0.0, 1.0);
}

Spectrum eigenvalues(const CouplingMatrix& matrix, double residual_bound) {
  return eigenvalues(matrix.entries(), residual_bound);
}

GapStatistics gap_statistics(std::span<const Complex> spectrum,
                             double tie_threshold) {
  const std::size_t n = spectrum.size();
  if (n < 3) throw std::invalid_argument("gap statistics need at least 3 levels");
  GapStatistics out;
  out.sorted_real_parts.reserve(n);
  for (const Complex& z : spectrum) out.sorted_real_parts.push_back(z.real());
  std::sort(out.sorted_real_parts.begin(), out.sorted_real_parts.end());
  const double lo = out.sorted_real_parts.front();
  const double span = out.sorted_real_parts.back() - lo;
  if (!(span > 0.0)) throw NumericalError("too few distinct levels");

  out.gaps.resize(n - 1);
  std::vector<double> unit_gaps(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.gaps[i] = out.sorted_real_parts[i + 1] - out.sorted_real_parts[i];
    const double g = (out.sorted_real_parts[i + 1] - lo) / span -
                     (out.sorted_real_parts[i] - lo) / span;
    unit_gaps[i] = g <= tie_threshold ? 0.0 : g;
  }
  out.ratios.resize(n - 2);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double a = unit_gaps[i];
    const double b = unit_gaps[i + 1];
    const double hi = std::max(a, b);
    if (hi == 0.0) {
      out.ratios[i] = kNaN;
      ++out.excluded;
      continue;
    }
    const double r = std::min(a, b) / hi;
    out.ratios[i] = r;
    sum += r;
    sum_sq += r * r;
    ++out.used;
  }
  if (out.used == 0) throw NumericalError("too few distinct levels");
  out.r_a = sum / out.used;
  out.v_i = sum_sq / out.used - out.r_a * out.r_a;
  return out;
}

GapStatistics gap_statistics(const Eigen::VectorXcd& spectrum,
                             double tie_threshold) {
  return gap_statistics(
      std::span<const Complex>(spectrum.data(),
                               static_cast<std::size_t>(spectrum.size())),
      tie_threshold);
}

Histogram make_histogram(std::span<const double> values, int bins, double lo,
                         double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("invalid histogram");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.density.assign(static_cast<std::size_t>(bins), 0.0);
  std::size_t total = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
    ++total;
  }
  if (total > 0) {
    const double w = h.bin_width();
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      h.density[b] = static_cast<double>(h.counts[b]) / (total * w);
    }
  }
  return h;
}

GapReport ensemble_gap_report(const SystemParams& params, int realizations,
                              std::uint64_t seed, int bins, int workers,
                              GapConvention convention) {
  params.validate();
  if (params.directionality != 0.0) {
    throw std::invalid_argument(
        "gap statistics are defined at directionality 0 only");
  }
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (params.n_sites < 3) throw std::invalid_argument("need at least 3 sites");

  const auto count = static_cast<std::size_t>(realizations);
  std::vector<GapStatistics> stats(count);
  std::vector<Spectrum> spectra(count);
  parallel_for(
      0, count, resolve_workers(workers),
      [&](std::size_t r) {
        const auto disorder =
            sample_disorder(params, rng::realization_seed(seed, r));
        spectra[r] = eigenvalues(build_coupling_matrix(params, disorder));
        stats[r] = gap_statistics(levels(spectra[r].values, convention));
      },
      [](std::size_t r, std::exception_ptr e) {
        try {
          std::rethrow_exception(e);
        } catch (const std::exception& ex) {
          throw EnsembleError(r, ex.what());
        }
      });

  GapReport out;
  out.realizations = realizations;
  out.seed = seed;
  out.convention = convention;
  const std::size_t gaps = static_cast<std::size_t>(params.n_sites) - 2;
  std::vector<double> gap_sum(gaps, 0.0);
  std::vector<int> gap_count(gaps, 0);
  std::vector<double> pooled;
  pooled.reserve(count * gaps);
  for (std::size_t r = 0; r < count; ++r) {
    const auto& s = stats[r];
    out.r_a.push_back(s.r_a);
    out.v_i.push_back(s.v_i);
    out.excluded += s.excluded;
    out.max_residual = std::max(out.max_residual, spectra[r].max_residual);
    out.max_trace_error = std::max(out.max_trace_error, spectra[r].trace_error);
    for (std::size_t i = 0; i < gaps; ++i) {
      if (std::isnan(s.ratios[i])) continue;
      gap_sum[i] += s.ratios[i];
      ++gap_count[i];
      pooled.push_back(s.ratios[i]);
    }
  }
  double sum = 0.0, vsum = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    sum += out.r_a[r];
    vsum += out.v_i[r];
  }
  out.r_bar = sum / realizations;
  out.v_i_mean = vsum / realizations;
  double var = 0.0;
  for (double ra : out.r_a) var += (ra - out.r_bar) * (ra - out.r_bar);
  out.r_a_variance = var / realizations;
  out.gap_means.resize(gaps);
  for (std::size_t i = 0; i < gaps; ++i) {
    out.gap_means[i] = gap_count[i] > 0 ? gap_sum[i] / gap_count[i] : kNaN;
  }
  out.gap_mean_histogram = make_histogram(out.gap_means, bins);
  out.pooled_histogram = make_histogram(pooled, bins);
  return out;
}

}  // namespace chiralloc
