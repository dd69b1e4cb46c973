#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "acr/dynamics/ssa.hpp"
#include "acr/model/parser.hpp"
#include "acr/model/rates.hpp"
#include "acr/statistics/measures.hpp"
#include "acr/statistics/reference.hpp"
#include "oracles/uniformization.hpp"

using namespace acr;

namespace {

ScaledSystem unscaled(const ReactionNetwork& net, std::vector<Count> x0) {
    return ScaledSystem{1, net, std::move(x0)};
}

class EventCounter : public SsaObserver {
public:
    void on_event(double, std::size_t, std::span<const Count>) override { ++events; }
    std::uint64_t events = 0;
};

// Dense generator of the two-species motif on A = 0..cap with A + B = total.
oracle::Generator motif_generator(double k1, double k2, int total, int cap) {
    oracle::Generator q(cap + 1, std::vector<double>(cap + 1, 0.0));
    for (int a = 0; a <= cap; ++a) {
        const double b = total - a;
        if (a > 0) q[a][a - 1] = k1 * a * b;
        if (a < cap) q[a][a + 1] = k2 * b;
        q[a][a] = -(a > 0 ? q[a][a - 1] : 0.0) - (a < cap ? q[a][a + 1] : 0.0);
    }
    return q;
}

}  // namespace

TEST_CASE("no enabled reaction: the path stays at x0 and is flagged absorbed") {
    const auto net = parse_network("A -> 0 @ ma(1)\n");
    const auto tr = simulate_ssa(unscaled(net, {0}), 3.0, 11);
    CHECK(tr.absorbed);
    REQUIRE(tr.size() == 1);
    CHECK(tr.state(0)[0] == 0);

    const auto drained = simulate_ssa(unscaled(net, {3}), 1e3, 11);
    CHECK(drained.absorbed);
    CHECK(drained.size() == 4);
}

TEST_CASE("paths are non-negative, conserve A + B and move by reaction vectors") {
    const auto net = parse_network("let k1 = 1;\nlet k2 = 2;\nA + B -> 2B @ ma(k1)\nB -> A @ ma(k2)\n");
    const auto tr = simulate_ssa(unscaled(net, {2, 500}), 2.0, 5);
    REQUIRE(tr.size() > 100);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto x = tr.state(i);
        CHECK(x[0] >= 0);
        CHECK(x[1] >= 0);
        CHECK(x[0] + x[1] == 502);
        if (i == 0) continue;
        CHECK(tr.times[i] > tr.times[i - 1]);
        CHECK(tr.times[i] <= 2.0);
        const auto prev = tr.state(i - 1);
        const auto& xi = net.reactions()[tr.reactions[i]].reaction_vector;
        CHECK(x[0] - prev[0] == xi[0]);
        CHECK(x[1] - prev[1] == xi[1]);
    }
}

TEST_CASE("identical seeds give bit-identical trajectories") {
    const auto net = parse_network("0 -> A @ ma(3)\nA -> 0 @ ma(0.5)\n2A -> B @ ma(0.1)\n");
    const auto a = simulate_ssa(unscaled(net, {1, 0}), 5.0, 42);
    const auto b = simulate_ssa(unscaled(net, {1, 0}), 5.0, 42);
    const auto c = simulate_ssa(unscaled(net, {1, 0}), 5.0, 43);
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.reactions == b.reactions);
    CHECK(a.times != c.times);
}

TEST_CASE("pure birth at rate 3 until t = 2 fires Poisson(6) many times") {
    const auto net = parse_network("0 -> A @ ma(3)\n");
    SsaSimulator sim(net);
    EmpiricalMarginal counts;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        auto rng = Philox::for_replica(7, i);
        EventCounter c;
        SsaObserver* obs[] = {&c};
        const auto run = sim.run({0}, 2.0, rng, obs);
        CHECK(run.final_state[0] == static_cast<Count>(c.events));
        const Count k = static_cast<Count>(c.events);
        counts.add(std::span<const Count>(&k, 1));
    }
    const auto d = poisson_distance(counts, PoissonReference({6.0}));
    CHECK(d.chi_square_pvalue > 1e-3);
    CHECK(d.mean_error < 0.02);
}

TEST_CASE("mean event count of the motif matches the master equation") {
    const auto net = parse_network("A + B -> 2B @ ma(1)\nB -> A @ ma(1)\n");
    const int total = 1001, cap = 40;
    const auto q = motif_generator(1.0, 1.0, total, cap);

    // E[events on [0,1]] = integral of E[a0(X(t))], Simpson on 200 cells.
    const int cells = 200;
    const double h = 1.0 / cells;
    std::vector<double> p(cap + 1, 0.0);
    p[1] = 1.0;
    auto a0 = [&](const std::vector<double>& pv) {
        double s = 0.0;
        for (int a = 0; a <= cap; ++a) s += pv[a] * (a * double(total - a) + double(total - a));
        return s;
    };
    double expected = 0.0;
    double left = a0(p);
    for (int i = 0; i < cells; ++i) {
        const auto mid = oracle::transient(q, p, 0.5 * h);
        p = oracle::transient(q, p, h);
        const double right = a0(p);
        expected += h / 6.0 * (left + 4.0 * a0(mid) + right);
        left = right;
    }

    SsaSimulator sim(net);
    const int seeds = 1000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < seeds; ++i) {
        auto rng = Philox::for_replica(2026, i);
        const double e = static_cast<double>(sim.run({1, 1000}, 1.0, rng).events);
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / seeds;
    const double se = std::sqrt((sum2 / seeds - mean * mean) / seeds);
    CHECK(std::abs(mean - expected) < 5.0 * se);
}

TEST_CASE("two-state chain at t = 1 matches uniformization in total variation") {
    const auto net = parse_network("A -> B @ ma(1.5)\nB -> A @ ma(0.7)\n");
    const oracle::Generator q{{-1.5, 1.5}, {0.7, -0.7}};
    const auto exact = oracle::transient(q, {1.0, 0.0}, 1.0);
    SsaSimulator sim(net);
    double in_a = 0.0;
    const int seeds = 100000;
    for (int i = 0; i < seeds; ++i) {
        auto rng = Philox::for_replica(99, i);
        in_a += static_cast<double>(sim.run({1, 0}, 1.0, rng).final_state[0]);
    }
    const double pa = in_a / seeds;
    const double tv = 0.5 * (std::abs(pa - exact[0]) + std::abs(1.0 - pa - exact[1]));
    CHECK(tv < 0.01);
}

TEST_CASE("the event guard turns a runaway path into an error") {
    const auto net = parse_network("A -> 2A @ ma(1)\n");
    SsaSimulator sim(net);
    auto rng = Philox::for_replica(1, 0);
    SsaOptions opt;
    opt.max_events = 1000;
    opt.N = 100;
    CHECK_THROWS_AS(sim.run({5}, 100.0, rng, {}, opt), ExplosionSuspected);
}

TEST_CASE("dependency graph links reactions through the species they read") {
    const auto net = parse_network(
        "A -> B @ ma(1)\nB -> C @ ma(1)\nC -> 0 @ expr(x[A] * x[C])\n");
    SsaSimulator sim(net);
    CHECK(sim.dependents(0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(sim.dependents(1) == std::vector<std::size_t>{1, 2});
    CHECK(sim.dependents(2) == std::vector<std::size_t>{2});
    CHECK(sim.inputs(2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("sup distance between a path and the limit ODE") {
    const OdeRhs still = [](double, std::span<const double>, std::span<double> dz) {
        std::fill(dz.begin(), dz.end(), 0.0);
    };
    const auto z = integrate_ode(still, {0.5}, 1.0);
    const std::vector<int> alpha{0, 1};

    Trajectory constant;
    constant.num_species = 2;
    constant.T = 1.0;
    constant.times = {0.0};
    constant.states = {3, 50};
    constant.reactions = {-1};
    CHECK(path_sup_distance(constant, z, alpha, 100.0) == 0.0);

    Trajectory jump = constant;
    jump.times.push_back(0.4);
    jump.states.insert(jump.states.end(), {2, 52});
    jump.reactions.push_back(0);
    CHECK(path_sup_distance(jump, z, alpha, 100.0) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("trajectory CSV keeps the header, every stride-th row and the last row") {
    const auto net = parse_network("0 -> A @ ma(50)\n");
    const auto tr = simulate_ssa(unscaled(net, {0}), 1.0, 3);
    const std::string path = "ssa_export_test.csv";
    tr.export_csv(path, {"A"}, 10);
    std::ifstream in(path);
    std::string header, line, last;
    std::getline(in, header);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    std::remove(path.c_str());
    CHECK(header == "t,A,reaction");
    const std::size_t n = tr.size();
    CHECK(rows == (n + 9) / 10 + ((n - 1) % 10 != 0 ? 1 : 0));
    CHECK(last.substr(last.rfind(',') + 1) == "0");
}
