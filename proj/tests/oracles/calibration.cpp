#include "oracles/calibration.hpp"

#include <cmath>

#include "oracles/uniformization.hpp"

namespace oracle {

namespace {

double sup_abs_cdf(double x) {
    const double pi = std::acos(-1.0);
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double m = 2.0 * k + 1.0;
        sum += (k % 2 ? -1.0 : 1.0) / m * std::exp(-m * m * pi * pi / (8.0 * x * x));
    }
    return 4.0 / pi * sum;
}

}  // namespace

double brownian_sup_abs_median() {
    double lo = 0.1, hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (sup_abs_cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double immigration_death_residual_median(double q, double mu, double T) {
    return std::sqrt(2.0 * q / mu) * std::sqrt(T) * brownian_sup_abs_median();
}

std::vector<double> dimerization_stationary(double a, double b, int cap) {
    Generator g(cap + 1, std::vector<double>(cap + 1, 0.0));
    for (int v = 0; v <= cap; ++v) {
        if (v >= 2) g[v][v - 2] = a * v * (v - 1);
        if (v < cap) g[v][v + 1] = b;
        for (int j = 0; j <= cap; ++j) {
            if (j != v) g[v][v] -= g[v][j];
        }
    }
    return stationary(g);
}

double tv_to_matched_poisson(const std::vector<double>& pmf) {
    double mean = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) mean += k * pmf[k];
    double overlap = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double p = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
        overlap += std::min(p, pmf[k]);
    }
    return 1.0 - overlap;
}

}  // namespace oracle
