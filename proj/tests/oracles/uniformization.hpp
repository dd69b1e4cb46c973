#pragma once

// Dense finite-state CTMC references for the tests: transient laws by
// uniformization and stationary laws by iterating the uniformized chain.

#include <vector>

namespace oracle {

using Generator = std::vector<std::vector<double>>;  // Q[i][j], rows sum to 0

/// p(t) = p0 exp(Qt) via the Poisson-weighted series of the uniformized chain.
std::vector<double> transient(const Generator& q, const std::vector<double>& p0, double t);

/// Stationary law by power iteration of P = I + Q / Lambda.
std::vector<double> stationary(const Generator& q, int max_iterations = 2'000'000,
                               double tol = 1e-15);

}  // namespace oracle
