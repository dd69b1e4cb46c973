#include "acr/dynamics/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "acr/model/rates.hpp"

namespace acr {

namespace {

std::string explosion_message(long long N, double t, std::uint64_t events) {
    std::string msg = "explosion suspected: " + std::to_string(events) + " events before t = " +
                      std::to_string(t);
    if (N > 0) msg += " at N = " + std::to_string(N);
    return msg;
}

// Leaves start at `width`; node i holds the sum of nodes 2i and 2i+1.
class SumTree {
public:
    explicit SumTree(std::size_t n) {
        width_ = 1;
        while (width_ < n) width_ *= 2;
        nodes_.assign(2 * width_, 0.0);
    }

    void set(std::size_t i, double v) {
        std::size_t k = width_ + i;
        nodes_[k] = v;
        for (k /= 2; k >= 1; k /= 2) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
    }
    double total() const { return nodes_[1]; }
    double leaf(std::size_t i) const { return nodes_[width_ + i]; }

    std::size_t select(double target) const {
        std::size_t k = 1;
        while (k < width_) {
            const double left = nodes_[2 * k];
            if (target < left || nodes_[2 * k + 1] <= 0.0) {
                k = 2 * k;
            } else {
                target -= left;
                k = 2 * k + 1;
            }
        }
        return k - width_;
    }

private:
    std::size_t width_;
    std::vector<double> nodes_;
};

}  // namespace

ExplosionSuspected::ExplosionSuspected(long long N, double t_reached, std::uint64_t events)
    : Error(explosion_message(N, t_reached, events)), t_reached_(t_reached) {}

SsaSimulator::SsaSimulator(const ReactionNetwork& net) : net_(net) {
    const std::size_t m = net_.num_reactions();
    kernels_.resize(m);
    changes_.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const auto& reaction = net_.reactions()[r];
        auto& k = kernels_[r];
        k.source = reaction.source.terms();
        for (const auto& [s, c] : k.source) k.inputs.push_back(s);
        if (reaction.rate_law.is_mass_action()) {
            k.kappa = reaction.rate_law.kappa();
        } else {
            const auto& body = *reaction.rate_law.as_expression().body;
            k.expression = true;
            k.expr = CompiledExpr(body);
            for (std::size_t s : referenced_species(body)) k.inputs.push_back(s);
        }
        std::sort(k.inputs.begin(), k.inputs.end());
        k.inputs.erase(std::unique(k.inputs.begin(), k.inputs.end()), k.inputs.end());
        for (std::size_t s = 0; s < reaction.reaction_vector.size(); ++s) {
            if (reaction.reaction_vector[s] != 0) changes_[r].emplace_back(s, reaction.reaction_vector[s]);
        }
    }
    dependents_.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto& in = kernels_[j].inputs;
            const bool hit = std::any_of(changes_[r].begin(), changes_[r].end(), [&](const auto& c) {
                return std::binary_search(in.begin(), in.end(), c.first);
            });
            if (hit) dependents_[r].push_back(j);
        }
    }
}

double SsaSimulator::rate(std::size_t r, std::span<const Count> x) const {
    const auto& k = kernels_[r];
    for (const auto& [s, c] : k.source) {
        if (x[s] < c) return 0.0;
    }
    double v;
    if (k.expression) {
        v = k.expr(x);
    } else {
        v = k.kappa;
        for (const auto& [s, c] : k.source) {
            const double xs = static_cast<double>(x[s]);
            for (Count i = 0; i < c; ++i) v *= xs - static_cast<double>(i);
        }
    }
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw EvaluationError("rate of reaction " + std::to_string(r) + " (" +
                              describe_reaction(net_, r) + ") is not a finite non-negative number");
    }
    return v;
}

SsaRun SsaSimulator::run(std::vector<Count> x, double T, Philox& rng,
                         std::span<SsaObserver* const> observers, const SsaOptions& options) const {
    if (!(T > 0.0)) throw ConfigError("simulation horizon must be positive");
    if (x.size() != net_.num_species()) throw ConfigError("initial state length mismatch");
    if (std::any_of(x.begin(), x.end(), [](Count c) { return c < 0; })) {
        throw ConfigError("initial state has a negative count");
    }
    const std::size_t m = net_.num_reactions();
    SumTree tree(m);
    for (std::size_t r = 0; r < m; ++r) tree.set(r, rate(r, x));
    for (auto* o : observers) o->on_start(x);

    SsaRun out;
    double t = 0.0;
    while (true) {
        const double a0 = tree.total();
        if (!(a0 > 0.0)) {
            out.absorbed = true;
            break;
        }
        t += -std::log(rng.uniform()) / a0;
        if (t > T) break;
        std::size_t r = tree.select(rng.uniform() * a0);
        if (r >= m || tree.leaf(r) <= 0.0) {
            // Rounding at the right edge of the cumulative sum.
            r = m;
            while (r-- > 0 && tree.leaf(r) <= 0.0) {}
        }
        for (const auto& [s, d] : changes_[r]) x[s] += d;
        for (std::size_t j : dependents_[r]) tree.set(j, rate(j, x));
        if (++out.events > options.max_events) throw ExplosionSuspected(options.N, t, out.events);
        for (auto* o : observers) o->on_event(t, r, x);
    }
    out.t_absorbed = out.absorbed ? t : T;
    for (auto* o : observers) o->on_finish(T, x);
    out.final_state = std::move(x);
    return out;
}

namespace {

class Recorder : public SsaObserver {
public:
    explicit Recorder(Trajectory& tr) : tr_(tr) {}
    void on_start(std::span<const Count> x0) override {
        tr_.times.push_back(0.0);
        tr_.states.insert(tr_.states.end(), x0.begin(), x0.end());
        tr_.reactions.push_back(-1);
    }
    void on_event(double t, std::size_t r, std::span<const Count> x) override {
        tr_.times.push_back(t);
        tr_.states.insert(tr_.states.end(), x.begin(), x.end());
        tr_.reactions.push_back(static_cast<int>(r));
    }

private:
    Trajectory& tr_;
};

}  // namespace

Trajectory simulate_ssa(const ScaledSystem& system, double T, std::uint64_t seed,
                        const SsaOptions& options) {
    Trajectory tr;
    tr.num_species = system.network.num_species();
    tr.seed = seed;
    tr.T = T;
    SsaSimulator sim(system.network);
    Recorder rec(tr);
    SsaObserver* obs[] = {&rec};
    Philox rng = Philox::for_replica(seed, 0);
    SsaOptions opt = options;
    if (opt.N == 0) opt.N = system.N;
    tr.absorbed = sim.run(system.initial_state, T, rng, obs, opt).absorbed;
    return tr;
}

void Trajectory::export_csv(const std::string& path, const std::vector<std::string>& names,
                            std::size_t stride) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    write_csv(f, names, stride);
}

void Trajectory::write_csv(std::ostream& f, const std::vector<std::string>& names,
                           std::size_t stride) const {
    f << "t";
    for (const auto& n : names) f << ',' << n;
    f << ",reaction\n";
    if (stride == 0) stride = 1;
    for (std::size_t i = 0; i < size(); ++i) {
        if (i % stride != 0 && i + 1 != size()) continue;
        f << format_number(times[i]);
        for (Count c : state(i)) f << ',' << c;
        f << ',' << reactions[i] << '\n';
    }
}

PathDistanceObserver::PathDistanceObserver(const OdeSolution& z, std::vector<std::size_t> continuous,
                                           double N, std::size_t grid_points)
    : z_(z),
      continuous_(std::move(continuous)),
      inv_n_(1.0 / N),
      grid_points_(std::max<std::size_t>(grid_points, 2)),
      T_(z.t_end()),
      buffer_(z.dimension()) {
    if (continuous_.size() != z.dimension()) {
        throw ConfigError("path distance: ODE dimension does not match the continuous species");
    }
}

void PathDistanceObserver::on_start(std::span<const Count> x0) {
    current_.assign(x0.begin(), x0.end());
    next_grid_ = 0;
    sup_ = 0.0;
}

void PathDistanceObserver::compare(double t, std::span<const Count> x) {
    z_.evaluate(std::min(t, T_), buffer_);
    for (std::size_t j = 0; j < continuous_.size(); ++j) {
        const double d = std::abs(static_cast<double>(x[continuous_[j]]) * inv_n_ - buffer_[j]);
        if (d > sup_) sup_ = d;
    }
}

void PathDistanceObserver::grid_until(double t, bool inclusive) {
    while (next_grid_ < grid_points_) {
        const double g = T_ * static_cast<double>(next_grid_) / static_cast<double>(grid_points_ - 1);
        if (g > t || (!inclusive && g == t)) break;
        compare(g, current_);
        ++next_grid_;
    }
}

void PathDistanceObserver::on_event(double t, std::size_t, std::span<const Count> x) {
    grid_until(t, false);
    compare(t, current_);
    std::copy(x.begin(), x.end(), current_.begin());
    compare(t, current_);
}

void PathDistanceObserver::on_finish(double, std::span<const Count>) { grid_until(T_, true); }

double path_sup_distance(const Trajectory& trajectory, const OdeSolution& z,
                         std::span<const int> alpha, double N, std::size_t grid_points) {
    PathDistanceObserver obs(z, continuous_species(alpha), N, grid_points);
    if (trajectory.size() == 0) return 0.0;
    obs.on_start(trajectory.state(0));
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        obs.on_event(trajectory.times[i], static_cast<std::size_t>(trajectory.reactions[i]),
                     trajectory.state(i));
    }
    obs.on_finish(z.t_end(), trajectory.state(trajectory.size() - 1));
    return obs.distance();
}

}  // namespace acr
