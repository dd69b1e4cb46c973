#pragma once

// Independent references used to fix the study thresholds before the runs.

#include <vector>

namespace oracle {

/// Median of sup_{0<=s<=1} |W_s| for standard Brownian motion, from the
/// series P(sup|W| < x) = (4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 / (8x^2)).
double brownian_sup_abs_median();

/// Predicted median of sup_{t<=T} |integral_0^t (X(s) - q) ds| for an
/// immigration-death chain with per-capita death rate mu and stationary
/// mean q, in the diffusive regime: sqrt(2 q / mu) sqrt(T) times the median above.
double immigration_death_residual_median(double q, double mu, double T);

/// Stationary law of 2A -> 0 (rate a v(v-1)), 0 -> A (rate b) on 0..cap.
std::vector<double> dimerization_stationary(double a, double b, int cap);

/// TV between a pmf on 0..n-1 and the Poisson law with the same mean.
double tv_to_matched_poisson(const std::vector<double>& pmf);

}  // namespace oracle
