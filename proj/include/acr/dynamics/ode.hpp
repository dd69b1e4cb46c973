#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acr/model/network.hpp"
#include "acr/util/error.hpp"

namespace acr {

using OdeRhs = std::function<void(double t, std::span<const double> z, std::span<double> dz)>;

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    std::size_t max_steps = 50'000'000;
    /// Interior points per step sampled when tracking the minimum coordinate.
    int min_samples_per_step = 4;
    /// Keep the interpolant of every step (required for evaluate()).
    bool dense = true;
};

class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(double last_t, const std::string& what)
        : Error(what + " (last valid t = " + std::to_string(last_t) + ")"), last_t_(last_t) {}
    double last_t() const { return last_t_; }

private:
    double last_t_;
};

/// Dormand-Prince 5(4) solution with the 4th-order continuous extension.
class OdeSolution {
public:
    double t_end() const { return t_end_; }
    std::size_t dimension() const { return dim_; }
    const std::vector<double>& final_state() const { return final_; }
    /// Minimum over [0, T] of min_i z_i(t), sampled on every step.
    double min_coordinate() const { return min_coordinate_; }
    std::size_t steps() const { return starts_.size(); }

    std::vector<double> evaluate(double t) const;
    void evaluate(double t, std::span<double> out) const;

    /// Uniform grid CSV: `t,name1,name2,...`.
    void export_csv(const std::string& path, const std::vector<std::string>& names,
                    std::size_t points) const;

private:
    friend OdeSolution integrate_ode(const OdeRhs&, std::vector<double>, double, double,
                                     const OdeOptions&);
    std::size_t dim_ = 0;
    double t0_ = 0.0;
    double t_end_ = 0.0;
    double min_coordinate_ = 0.0;
    std::vector<double> initial_;
    std::vector<double> final_;
    std::vector<double> starts_;
    std::vector<double> widths_;
    std::vector<double> coeffs_;  // 5 * dim per step
};

/// Integrates z' = rhs(t, z) from t0 to t1. Throws StepSizeUnderflow when the
/// step size collapses (stiffness or blow-up).
OdeSolution integrate_ode(const OdeRhs& rhs, std::vector<double> z0, double t0, double t1,
                          const OdeOptions& options = {});

inline OdeSolution integrate_ode(const OdeRhs& rhs, std::vector<double> z0, double T,
                                 const OdeOptions& options = {}) {
    return integrate_ode(rhs, std::move(z0), 0.0, T, options);
}

/// Right-hand side sum_r xi_r lambda_r(z) of the deterministic model.
OdeRhs network_rhs(const ReactionNetwork& net);

}  // namespace acr
