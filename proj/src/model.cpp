#include "chiralloc/model.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "chiralloc/rng.hpp"

namespace chiralloc {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(std::string(field) + ": " + what);
  }
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

std::string_view to_string(DisorderMode mode) {
  switch (mode) {
    case DisorderMode::PhaseFactor:
      return "phase";
    case DisorderMode::OnsitePotential:
      return "onsite";
  }
  return "phase";
}

DisorderMode parse_disorder_mode(std::string_view text) {
  if (text == "phase" || text == "phase-factor" || text == "PhaseFactor") {
    return DisorderMode::PhaseFactor;
  }
  if (text == "onsite" || text == "onsite-potential" ||
      text == "OnsitePotential") {
    return DisorderMode::OnsitePotential;
  }
  throw std::invalid_argument("unknown disorder mode '" + std::string(text) +
                              "' (expected 'phase' or 'onsite')");
}

void SystemParams::validate() const {
  require(n_sites >= 1, "n_sites", "must be a positive integer");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma", "must be > 0");
  require(std::isfinite(directionality) && directionality >= -1.0 &&
              directionality <= 1.0,
          "directionality", "must lie in [-1, 1]");
  require(std::isfinite(xi) && xi >= 0.0 && xi <= std::numbers::pi, "xi",
          "must lie in [0, pi]");
  require(std::isfinite(disorder_strength) && disorder_strength >= 0.0 &&
              disorder_strength <= 1.0,
          "disorder_strength", "must lie in [0, 1]");
  require(std::isfinite(gamma_nr) && gamma_nr >= 0.0, "gamma_nr",
          "must be >= 0");
  require(initial_site >= 0 && initial_site <= n_sites, "initial_site",
          "must lie in [1, n_sites] (or 0 for the centre)");
}

DecayRates derive_rates(const SystemParams& params) {
  params.validate();
  return {params.gamma * (1.0 + params.directionality) / 2.0,
          params.gamma * (1.0 - params.directionality) / 2.0};
}

double beta_factor(const SystemParams& params) {
  params.validate();
  return params.gamma / (params.gamma + params.gamma_nr);
}

DisorderRealization sample_disorder(const SystemParams& params,
                                    std::uint64_t seed) {
  params.validate();
  DisorderRealization out;
  out.seed = seed;
  out.phases.assign(static_cast<std::size_t>(params.n_sites), 0.0);
  const double half_width = std::numbers::pi * params.disorder_strength;
  if (half_width == 0.0) return out;
  for (std::size_t mu = 0; mu < out.phases.size(); ++mu) {
    const double u = rng::to_unit(rng::keyed(seed, mu));
    out.phases[mu] = half_width * (2.0 * u - 1.0);
  }
  return out;
}

DisorderRealization zero_disorder(int n_sites) {
  DisorderRealization out;
  out.phases.assign(static_cast<std::size_t>(n_sites), 0.0);
  return out;
}

DisorderRealization mirrored(DisorderRealization disorder) {
  for (double& w : disorder.phases) w = -w;
  return disorder;
}

std::uint64_t fingerprint(const SystemParams& params,
                          const DisorderRealization& disorder) {
  std::uint64_t h = rng::mix64(static_cast<std::uint64_t>(params.n_sites));
  for (double x : {params.gamma, params.directionality, params.xi,
                   params.disorder_strength, params.gamma_nr}) {
    h = rng::keyed(h, bits(x));
  }
  h = rng::keyed(h, static_cast<std::uint64_t>(params.disorder_mode));
  h = rng::keyed(h, static_cast<std::uint64_t>(params.start_site()));
  for (double w : disorder.phases) h = rng::keyed(h, bits(w));
  return h;
}

CouplingMatrix build_coupling_matrix(const SystemParams& params,
                                     const DisorderRealization& disorder) {
  const auto rates = derive_rates(params);
  const int n = params.n_sites;
  if (static_cast<int>(disorder.phases.size()) != n) {
    throw std::invalid_argument(
        "disorder realization has " + std::to_string(disorder.phases.size()) +
        " phases but n_sites = " + std::to_string(n));
  }
  const bool phase_mode = params.disorder_mode == DisorderMode::PhaseFactor;
  const auto& w = disorder.phases;

  Eigen::MatrixXcd m(n, n);
  const double diag = -(params.gamma + params.gamma_nr) / 2.0;
  for (int hi = 0; hi < n; ++hi) {
    m(hi, hi) = phase_mode ? Complex(diag, 0.0) : Complex(diag, -w[hi]);
    for (int lo = 0; lo < hi; ++lo) {
      // Both entries of the pair share one phase so that D = 0 gives an
      // exactly complex-symmetric matrix.
      double phase = (hi - lo) * params.xi;
      if (phase_mode) phase += w[hi] - w[lo];
      const Complex factor = std::polar(1.0, -phase);
      m(hi, lo) = -rates.right * factor;  // from lo downstream to hi
      m(lo, hi) = -rates.left * factor;   // from hi upstream to lo
    }
  }
  return CouplingMatrix(std::move(m), fingerprint(params, disorder));
}

}  // namespace chiralloc
