#include "chiralloc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "chiralloc/error.hpp"

namespace chiralloc {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double x_span = 0.0;
  bool degenerate = true;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  LineFit fit;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return fit;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.degenerate = false;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.x_span = *hi - *lo;
  return fit;
}

void check_normalized(std::span<const double> p, const char* name) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(name) +
                                " is not normalized (sum = " +
                                std::to_string(sum) + ")");
  }
}

}  // namespace

LocalizationFit localization_fit(std::span<const double> profile, int center,
                                 double floor_ratio) {
  const int n = static_cast<int>(profile.size());
  if (center < 1 || center > n) {
    throw std::invalid_argument("center outside the profile");
  }
  LocalizationFit out;
  double peak = 0.0;
  for (double p : profile) {
    if (!(p >= 0.0)) throw std::invalid_argument("profile must be nonnegative");
    peak = std::max(peak, p);
  }
  if (peak == 0.0) {
    out.failure = "profile is identically zero";
    return out;
  }
  std::vector<double> x, y;
  int first = n + 1, last = 0;
  for (int site = 1; site <= n; ++site) {
    const double p = profile[site - 1];
    if (site == center || p <= 0.0 || p < floor_ratio * peak) continue;
    x.push_back(std::abs(site - center));
    y.push_back(std::log(p));
    first = std::min(first, site);
    last = std::max(last, site);
  }
  out.points = static_cast<int>(x.size());
  if (out.points < 3) {
    out.failure = "fewer than 3 sites above the floor";
    return out;
  }
  out.first_site = first;
  out.last_site = last;
  const LineFit line = least_squares(x, y);
  if (line.degenerate) {
    out.failure = "all fitted sites at the same distance from the centre";
    return out;
  }
  // A decay that changes ln P by less than 1e-12 across the window is flat.
  if (!(-line.slope * line.x_span > 1e-12)) {
    out.failure = "profile does not decay away from the centre";
    return out;
  }
  out.ok = true;
  out.n_l = -1.0 / line.slope;
  out.zeta_l = 2.0 * out.n_l * std::numbers::ln2;
  out.amplitude = std::exp(line.intercept);
  out.r_squared = line.r_squared;
  return out;
}

std::vector<double> normalized(std::span<const double> profile) {
  const double sum = std::accumulate(profile.begin(), profile.end(), 0.0);
  if (!(sum > 0.0)) throw std::invalid_argument("profile has zero weight");
  std::vector<double> out(profile.begin(), profile.end());
  for (double& p : out) p /= sum;
  return out;
}

double relative_participation_ratio(std::span<const double> avg_profile,
                                    std::span<const double> ref_profile) {
  if (avg_profile.size() != ref_profile.size()) {
    throw std::invalid_argument("profile lengths differ");
  }
  check_normalized(avg_profile, "averaged profile");
  check_normalized(ref_profile, "reference profile");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < avg_profile.size(); ++i) {
    const double d = avg_profile[i] - ref_profile[i];
    if (d > 0.0) {
      sum += d;
      sum_sq += d * d;
    }
  }
  return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
}

double binary_entropy(double p) {
  auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

EntropyPair entropy_bipartite(std::span<const Complex> amplitudes, int split) {
  const int n = static_cast<int>(amplitudes.size());
  if (split < 0 || split > n) {
    throw std::invalid_argument("split outside [0, N]");
  }
  double lambda_a = 0.0, lambda_b = 0.0;
  for (int i = 0; i < n; ++i) {
    (i < split ? lambda_a : lambda_b) += std::norm(amplitudes[i]);
  }
  if (lambda_a + lambda_b > 1.0 + 1e-9 || !std::isfinite(lambda_a + lambda_b)) {
    throw std::invalid_argument("state norm exceeds 1");
  }
  return {binary_entropy(std::min(lambda_a, 1.0)),
          binary_entropy(std::min(lambda_b, 1.0))};
}

EntropyPair entropy_bipartite(const Eigen::VectorXcd& amplitudes, int split) {
  return entropy_bipartite(
      std::span<const Complex>(amplitudes.data(),
                               static_cast<std::size_t>(amplitudes.size())),
      split);
}

PowerLawFit powerlaw_exponent(std::span<const double> times,
                              std::span<const double> series, double t_start,
                              double floor, int min_points, double t_end) {
  if (times.size() != series.size()) {
    throw std::invalid_argument("times and series lengths differ");
  }
  PowerLawFit out;
  std::vector<double> x, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_start || times[k] > t_end || times[k] <= 0.0 ||
        !(series[k] > floor)) {
      continue;
    }
    x.push_back(std::log(times[k]));
    y.push_back(std::log(series[k]));
  }
  out.points = static_cast<int>(x.size());
  if (out.points < min_points) {
    out.failure = "fewer than " + std::to_string(min_points) +
                  " usable points in the tail";
    return out;
  }
  const LineFit line = least_squares(x, y);
  if (line.degenerate) {
    out.failure = "degenerate time window";
    return out;
  }
  out.ok = true;
  out.beta = -line.slope;
  out.prefactor = std::exp(line.intercept);
  out.r_squared = line.r_squared;
  return out;
}

ExponentRatio exponent_ratio(std::span<const double> times,
                             std::span<const double> disordered,
                             std::span<const double> reference,
                             double t_start, double t_end) {
  ExponentRatio out;
  out.disordered =
      powerlaw_exponent(times, disordered, t_start, 1e-12, 8, t_end);
  out.reference =
      powerlaw_exponent(times, reference, t_start, 1e-12, 8, t_end);
  if (out.disordered.ok && out.reference.ok && out.reference.beta != 0.0) {
    out.ok = true;
    out.ratio = out.disordered.beta / out.reference.beta;
  }
  return out;
}

double reference_time(std::span<const double> times,
                      std::span<const double> total, double level) {
  if (times.size() != total.size() || times.empty()) {
    throw std::invalid_argument("times and totals must be nonempty and match");
  }
  if (!(level > 0.0) || level > 1.0) {
    throw std::invalid_argument("level must lie in (0, 1]");
  }
  if (total[0] <= level) return times[0];
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (total[k] <= level) {
      const double frac = (total[k - 1] - level) / (total[k - 1] - total[k]);
      return times[k - 1] + frac * (times[k] - times[k - 1]);
    }
  }
  throw NumericalError("total population never drops to " +
                           std::to_string(level) + " within the horizon",
                       times.back());
}

double entropy_tail_start(std::span<const double> times,
                          std::span<const double> reference_entropy,
                          double level) {
  if (times.size() != reference_entropy.size() || times.empty()) {
    throw std::invalid_argument("times and entropy must be nonempty and match");
  }
  const auto peak = static_cast<std::size_t>(
      std::max_element(reference_entropy.begin(), reference_entropy.end()) -
      reference_entropy.begin());
  for (std::size_t k = peak; k < times.size(); ++k) {
    if (reference_entropy[k] <= level) return times[k];
  }
  throw NumericalError("reference entropy never falls to " +
                           std::to_string(level) + " after its peak",
                       times.back());
}

std::vector<double> profile_at(std::span<const double> times,
                               const Eigen::MatrixXd& grid, double t) {
  if (times.empty() || static_cast<Eigen::Index>(times.size()) != grid.rows()) {
    throw std::invalid_argument("grid rows must match the time axis");
  }
  if (t < times.front() || t > times.back()) {
    throw std::invalid_argument("time outside the grid");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto hi = static_cast<Eigen::Index>(it - times.begin());
  std::vector<double> out(static_cast<std::size_t>(grid.cols()));
  if (times[hi] == t || hi == 0) {
    for (Eigen::Index j = 0; j < grid.cols(); ++j) out[j] = grid(hi, j);
    return out;
  }
  const double frac = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    out[j] = (1.0 - frac) * grid(hi - 1, j) + frac * grid(hi, j);
  }
  return out;
}

std::string_view to_string(TransportPhase phase) {
  return phase == TransportPhase::Localized ? "Localized" : "Delocalized";
}

TransportRecord transport_record(const Eigen::MatrixXd& populations,
                                 int center) {
  if (center < 1 || center > populations.cols()) {
    throw std::invalid_argument("center outside the lattice");
  }
  TransportRecord rec;
  rec.argmax_sites.reserve(static_cast<std::size_t>(populations.rows()));
  rec.min_site = center;
  rec.max_site = center;
  for (Eigen::Index k = 0; k < populations.rows(); ++k) {
    Eigen::Index j = 0;
    populations.row(k).maxCoeff(&j);
    const int site = static_cast<int>(j) + 1;
    rec.argmax_sites.push_back(site);
    rec.min_site = std::min(rec.min_site, site);
    rec.max_site = std::max(rec.max_site, site);
  }
  rec.max_excursion =
      std::max(rec.max_site - center, center - rec.min_site);
  return rec;
}

TransportPhase classify_transport(const Eigen::MatrixXd& avg_populations,
                                  const Eigen::MatrixXd& ref_populations,
                                  int center, int edge_margin,
                                  TransportRecord* record) {
  if (avg_populations.rows() != ref_populations.rows() ||
      avg_populations.cols() != ref_populations.cols()) {
    throw std::invalid_argument("ensemble and reference grids differ");
  }
  TransportRecord rec = transport_record(avg_populations, center);
  const TransportRecord ref = transport_record(ref_populations, center);
  const int reach = ref.max_excursion;
  if (reach == 0) {
    rec.reached_edge = true;
  } else {
    const bool right = ref.max_site - center == reach &&
                       rec.max_site >= ref.max_site - edge_margin;
    const bool left = center - ref.min_site == reach &&
                      rec.min_site <= ref.min_site + edge_margin;
    rec.reached_edge = right || left;
  }
  const auto phase = rec.reached_edge ? TransportPhase::Delocalized
                                      : TransportPhase::Localized;
  if (record != nullptr) *record = std::move(rec);
  return phase;
}

}  // namespace chiralloc
