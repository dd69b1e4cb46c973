#pragma once

// Exact stochastic simulation (Gillespie direct method). Propensities sit in
// the leaves of a flat binary sum tree; after a firing only the reactions
// whose rates read a changed species are recomputed.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "acr/dynamics/ode.hpp"
#include "acr/dynamics/rng.hpp"
#include "acr/model/expression.hpp"
#include "acr/model/network.hpp"
#include "acr/multiscale/scaling.hpp"
#include "acr/util/error.hpp"

namespace acr {

class ExplosionSuspected : public Error {
public:
    ExplosionSuspected(long long N, double t_reached, std::uint64_t events);
    double t_reached() const { return t_reached_; }

private:
    double t_reached_;
};

struct SsaOptions {
    std::uint64_t max_events = 1'000'000'000;
    /// Scale parameter quoted in the explosion message (0 when unknown).
    long long N = 0;
};

/// Receives every firing. `x` is the state right after reaction `r` fired
/// at time `t`; the state before is x - xi_r.
class SsaObserver {
public:
    virtual ~SsaObserver() = default;
    virtual void on_start(std::span<const Count> x0) { (void)x0; }
    virtual void on_event(double t, std::size_t r, std::span<const Count> x) = 0;
    /// `t_end` is the horizon T, also after early absorption.
    virtual void on_finish(double t_end, std::span<const Count> x) { (void)t_end, (void)x; }
};

struct SsaRun {
    std::vector<Count> final_state;
    std::uint64_t events = 0;
    bool absorbed = false;
    /// Time at which every rate became 0 (T when not absorbed).
    double t_absorbed = 0.0;
};

class SsaSimulator {
public:
    explicit SsaSimulator(const ReactionNetwork& net);

    SsaRun run(std::vector<Count> x0, double T, Philox& rng,
               std::span<SsaObserver* const> observers = {}, const SsaOptions& options = {}) const;

    const ReactionNetwork& network() const { return net_; }
    /// Species read by the rate of reaction r (sources and expression variables).
    const std::vector<std::size_t>& inputs(std::size_t r) const { return kernels_[r].inputs; }
    const std::vector<std::size_t>& dependents(std::size_t r) const { return dependents_[r]; }

private:
    struct Kernel {
        double kappa = 0.0;
        std::vector<std::pair<std::size_t, Count>> source;
        bool expression = false;
        CompiledExpr expr;
        std::vector<std::size_t> inputs;
    };
    double rate(std::size_t r, std::span<const Count> x) const;

    ReactionNetwork net_;
    std::vector<Kernel> kernels_;
    std::vector<std::vector<std::pair<std::size_t, Count>>> changes_;
    std::vector<std::vector<std::size_t>> dependents_;
};

/// Recorded path. Entry 0 is the initial state at t = 0 with reaction -1.
struct Trajectory {
    std::size_t num_species = 0;
    std::vector<double> times;
    std::vector<Count> states;  // row-major, one row per entry
    std::vector<int> reactions;
    std::uint64_t seed = 0;
    double T = 0.0;
    bool absorbed = false;

    std::size_t size() const { return times.size(); }
    std::span<const Count> state(std::size_t i) const {
        return {states.data() + i * num_species, num_species};
    }
    /// `t,name1,...,reaction`; keeps every `stride`-th event plus the last.
    void export_csv(const std::string& path, const std::vector<std::string>& names,
                    std::size_t stride = 1) const;
    void write_csv(std::ostream& out, const std::vector<std::string>& names,
                   std::size_t stride = 1) const;
};

/// Single recorded sample path of the scaled system on [0, T].
Trajectory simulate_ssa(const ScaledSystem& system, double T, std::uint64_t seed,
                        const SsaOptions& options = {});

/// Streams sup_t ||N^-1 pi_c X(t) - z(t)||_inf, evaluated at both one-sided
/// limits of every jump and on a uniform grid of `grid_points` times.
class PathDistanceObserver : public SsaObserver {
public:
    PathDistanceObserver(const OdeSolution& z, std::vector<std::size_t> continuous, double N,
                         std::size_t grid_points = 10000);

    void on_start(std::span<const Count> x0) override;
    void on_event(double t, std::size_t r, std::span<const Count> x) override;
    void on_finish(double t_end, std::span<const Count> x) override;

    double distance() const { return sup_; }

private:
    void grid_until(double t, bool inclusive);
    void compare(double t, std::span<const Count> x);

    const OdeSolution& z_;
    std::vector<std::size_t> continuous_;
    double inv_n_;
    std::size_t grid_points_;
    double T_;
    std::size_t next_grid_ = 0;
    std::vector<Count> current_;
    std::vector<double> buffer_;
    double sup_ = 0.0;
};

double path_sup_distance(const Trajectory& trajectory, const OdeSolution& z,
                         std::span<const int> alpha, double N, std::size_t grid_points = 10000);

}  // namespace acr
