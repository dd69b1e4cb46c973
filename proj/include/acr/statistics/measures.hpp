#pragma once

// Measurements on simulated discrete-species paths: residence times,
// fixed-time marginals across replicas, distances to a reference law and the
// running-integral residual of a time average.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "acr/dynamics/ssa.hpp"
#include "acr/statistics/reference.hpp"

namespace acr {

using StateFunction = std::function<double(std::span<const Count>)>;

/// Residence time of pi(X(t)) in each projected state over [0, T].
class OccupationMeasure {
public:
    void add(std::span<const Count> state, double duration);
    void merge(const OccupationMeasure& other);

    const std::map<std::vector<Count>, double>& weights() const { return weights_; }
    double total() const;
    /// (1/total) integral of g.
    double time_average(const StateFunction& g) const;

private:
    std::map<std::vector<Count>, double> weights_;
};

class OccupationObserver : public SsaObserver {
public:
    explicit OccupationObserver(std::vector<std::size_t> projection);

    void on_start(std::span<const Count> x0) override;
    void on_event(double t, std::size_t r, std::span<const Count> x) override;
    void on_finish(double t_end, std::span<const Count> x) override;

    const OccupationMeasure& measure() const { return measure_; }

private:
    std::vector<std::size_t> projection_;
    std::vector<Count> current_;
    std::vector<Count> next_;
    double since_ = 0.0;
    OccupationMeasure measure_;
};

OccupationMeasure occupation_measure(const Trajectory& trajectory,
                                     std::span<const std::size_t> projection);

/// Histogram of projected states at one time across replicas.
struct EmpiricalMarginal {
    double t = 0.0;
    std::map<std::vector<Count>, std::uint64_t> histogram;
    std::uint64_t replicas = 0;

    void add(std::span<const Count> state, std::uint64_t count = 1);
    std::vector<double> means() const;
    double expectation(const StateFunction& g) const;
};

struct DistanceReport {
    double total_variation = 0.0;
    double chi_square = 0.0;
    int degrees_of_freedom = 0;
    /// Advisory; pooled cells with expected count >= 5.
    double chi_square_pvalue = 1.0;
    /// max_i |mean_i - q_i| / q_i (absolute where q_i = 0).
    double mean_error = 0.0;
    /// Single observed state while the reference mean exceeds 0.1.
    bool degenerate = false;
};

/// `fitted_parameters` reduces the chi-square degrees of freedom (1 per
/// estimated mean for a best-fit reference).
DistanceReport poisson_distance(const EmpiricalMarginal& marginal, const Reference& reference,
                                int fitted_parameters = 0);

/// Uniform-grid antiderivative R(t) = integral_0^t f(s) ds (composite
/// Simpson on each cell), linearly interpolated.
class CumulativeCurve {
public:
    CumulativeCurve(const std::function<double(double)>& f, double T, std::size_t cells);
    double operator()(double t) const;
    double T() const { return T_; }

private:
    double T_;
    double h_;
    std::vector<double> values_;
};

/// Streams sup_t |integral_0^t g(pi X(s)) ds - R(t)| over jump times and a
/// uniform grid.
class RunningResidualObserver : public SsaObserver {
public:
    RunningResidualObserver(std::vector<std::size_t> projection, StateFunction g,
                            const CumulativeCurve& reference, std::size_t grid_points = 1000);

    void on_start(std::span<const Count> x0) override;
    void on_event(double t, std::size_t r, std::span<const Count> x) override;
    void on_finish(double t_end, std::span<const Count> x) override;

    double residual() const { return sup_; }

private:
    void advance(double t);

    std::vector<std::size_t> projection_;
    StateFunction g_;
    const CumulativeCurve& reference_;
    std::size_t grid_points_;
    std::size_t next_grid_ = 0;
    std::vector<Count> projected_;
    double g_now_ = 0.0;
    double t_now_ = 0.0;
    double integral_ = 0.0;
    double sup_ = 0.0;
};

double time_average_residual(const Trajectory& trajectory, std::span<const std::size_t> projection,
                             const StateFunction& g, const CumulativeCurve& reference,
                             std::size_t grid_points = 1000);

/// Records the projected state at fixed times t_k (right-continuous path).
class FixedTimeObserver : public SsaObserver {
public:
    FixedTimeObserver(std::vector<std::size_t> projection, std::vector<double> times);

    void on_start(std::span<const Count> x0) override;
    void on_event(double t, std::size_t r, std::span<const Count> x) override;
    void on_finish(double t_end, std::span<const Count> x) override;

    /// One projected state per requested time.
    const std::vector<std::vector<Count>>& samples() const { return samples_; }

private:
    std::vector<std::size_t> projection_;
    std::vector<double> times_;
    std::vector<Count> current_;
    std::vector<std::vector<Count>> samples_;
};

}  // namespace acr
