#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace chiralloc {

using Complex = std::complex<double>;

// How positional disorder enters the generator.
//  PhaseFactor: the random phases ride on the propagation phase of every
//    off-diagonal coupling (the disordered positions themselves).
//  OnsitePotential: couplings stay clean; each site picks up -i W_mu on the
//    diagonal instead.
enum class DisorderMode { PhaseFactor, OnsitePotential };

std::string_view to_string(DisorderMode mode);
DisorderMode parse_disorder_mode(std::string_view text);

// One physical configuration of the chirally coupled array.
//
// Sites are numbered 1..n_sites in increasing position. Times are measured in
// units of 1/gamma throughout the library.
struct SystemParams {
  int n_sites = 51;
  double gamma = 1.0;
  // (gamma_R - gamma_L) / gamma, in [-1, 1].
  double directionality = 0.0;
  // Propagation phase between neighbouring emitters, radians in [0, pi].
  double xi = 0.0;
  // W_mu is drawn uniformly from pi * [-w, w], w in [0, 1].
  double disorder_strength = 0.0;
  DisorderMode disorder_mode = DisorderMode::PhaseFactor;
  double gamma_nr = 0.0;
  // 1-based; 0 selects the centre site ceil(N/2).
  int initial_site = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // Resolved 1-based initial site.
  int start_site() const noexcept {
    return initial_site > 0 ? initial_site : (n_sites + 1) / 2;
  }
};

struct DecayRates {
  double right;
  double left;
};

DecayRates derive_rates(const SystemParams& params);

// Fraction of emission into the guided modes, gamma / (gamma + gamma_nr).
double beta_factor(const SystemParams& params);

struct DisorderRealization {
  std::vector<double> phases;  // W_mu, radians, one per site
  std::uint64_t seed = 0;
};

// N independent draws, uniform on [-pi w, pi w]. Draw mu depends only on
// (seed, mu), so a seed reproduces its realization bit for bit.
DisorderRealization sample_disorder(const SystemParams& params,
                                    std::uint64_t seed);

DisorderRealization zero_disorder(int n_sites);

// Same seed, all phases negated.
DisorderRealization mirrored(DisorderRealization disorder);

// Dense generator M of the single-excitation amplitude dynamics da/dt = M a.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  CouplingMatrix(Eigen::MatrixXcd entries, std::uint64_t fingerprint)
      : entries_(std::move(entries)), fingerprint_(fingerprint) {}

  const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
  int size() const noexcept { return static_cast<int>(entries_.rows()); }
  // Hash of the generating params and disorder phases.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  Eigen::MatrixXcd entries_;
  std::uint64_t fingerprint_ = 0;
};

CouplingMatrix build_coupling_matrix(const SystemParams& params,
                                     const DisorderRealization& disorder);

std::uint64_t fingerprint(const SystemParams& params,
                          const DisorderRealization& disorder);

}  // namespace chiralloc
