#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chiralloc/observables.hpp"

namespace chiralloc {

// Entropies from the explicit reduced density matrix. The mixed state
// |psi><psi| + (1 - <psi|psi>)|0><0| lives in the 2^N-dimensional qubit
// space; block A is traced out by reshaping psi into a 2^|A| x 2^|B| matrix.
// Exponential in N, intended for N <= 12.
EntropyPair entropy_partial_trace(const Eigen::VectorXcd& amplitudes, int split);

struct OracleResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Runs every analytic oracle of the library: closed forms and exact
// identities checked against the numerical paths.
std::vector<OracleResult> run_oracles();

}  // namespace chiralloc
