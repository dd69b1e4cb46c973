#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "acr/dynamics/ssa.hpp"
#include "acr/model/parser.hpp"
#include "acr/multiscale/scaling.hpp"
#include "acr/statistics/measures.hpp"
#include "acr/statistics/reference.hpp"

using namespace acr;

namespace {

Trajectory two_state_path() {
    Trajectory tr;
    tr.num_species = 2;
    tr.T = 4.0;
    tr.times = {0.0, 1.0, 3.0};
    tr.states = {1, 7, 2, 8, 1, 9};
    tr.reactions = {-1, 0, 1};
    return tr;
}

}  // namespace

TEST_CASE("occupation measure of constant and two-state paths") {
    Trajectory still;
    still.num_species = 1;
    still.T = 2.5;
    still.times = {0.0};
    still.states = {4};
    still.reactions = {-1};
    const std::vector<std::size_t> a{0};
    const auto m = occupation_measure(still, a);
    REQUIRE(m.weights().size() == 1);
    CHECK(m.weights().at({4}) == 2.5);

    const auto half = occupation_measure(two_state_path(), a);
    REQUIRE(half.weights().size() == 2);
    CHECK(half.weights().at({1}) == 2.0);
    CHECK(half.weights().at({2}) == 2.0);
    CHECK(half.total() == 4.0);
}

TEST_CASE("occupation weights sum to T along simulated paths") {
    const auto net = parse_network("let k1 = 1;\nlet k2 = 2;\nA + B -> 2B @ ma(k1)\nB -> A @ ma(k2)\n");
    const auto tr = simulate_ssa(ScaledSystem{1, net, {2, 300}}, 3.0, 17);
    const std::vector<std::size_t> a{0};
    const auto m = occupation_measure(tr, a);
    CHECK(std::abs(m.total() - 3.0) <= 1e-12 * 3.0);
}

TEST_CASE("time-averaged A in the scaled motif is close to k2/k1") {
    const auto base = parse_network("let k1 = 1;\nlet k2 = 2;\nA + B -> 2B @ ma(k1)\nB -> A @ ma(k2)\n");
    const ScalingSpec spec{{0, 1}, {2.0, 1.0}, {}};
    const auto sys = build_scaled_system(base, spec, 10000);
    SsaSimulator sim(sys.network);
    const int replicas = 20;
    std::vector<double> averages;
    for (int i = 0; i < replicas; ++i) {
        OccupationObserver occ({0});
        SsaObserver* obs[] = {&occ};
        auto rng = Philox::for_replica(20261018, i);
        sim.run(sys.initial_state, 10.0, rng, obs);
        averages.push_back(occ.measure().time_average([](auto v) { return double(v[0]); }));
    }
    double mean = 0.0, var = 0.0;
    for (double v : averages) mean += v / replicas;
    for (double v : averages) var += (v - mean) * (v - mean) / (replicas - 1);
    CHECK(std::abs(mean - 2.0) < 3.0 * std::sqrt(var / replicas));
}

TEST_CASE("running-integral residual: constants vanish and shifts are linear") {
    const auto tr = two_state_path();
    const std::vector<std::size_t> a{0};
    const CumulativeCurve three([](double) { return 3.0; }, 4.0, 100);
    CHECK(time_average_residual(tr, a, [](auto) { return 3.0; }, three) <= 1e-12);

    const CumulativeCurve level([](double) { return 1.5; }, 4.0, 100);
    const CumulativeCurve zero([](double) { return 0.0; }, 4.0, 100);
    const double plain = time_average_residual(tr, a, [](auto v) { return double(v[0]); }, level);
    const double shifted =
        time_average_residual(tr, a, [](auto v) { return double(v[0]) - 1.5; }, zero);
    CHECK(plain == doctest::Approx(shifted).epsilon(1e-12));
    // g = 1 on [0,1) and [3,4], 2 on [1,3): G - 1.5 t peaks at |0.5| for t = 1 and 4.
    CHECK(plain == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixed-time samples take the right-continuous state") {
    FixedTimeObserver obs({0}, {0.5, 1.0, 2.0, 4.0});
    const auto tr = two_state_path();
    obs.on_start(tr.state(0));
    obs.on_event(1.0, 0, tr.state(1));
    obs.on_event(3.0, 1, tr.state(2));
    obs.on_finish(4.0, tr.state(2));
    REQUIRE(obs.samples().size() == 4);
    CHECK(obs.samples()[0][0] == 1);
    CHECK(obs.samples()[1][0] == 2);
    CHECK(obs.samples()[2][0] == 2);
    CHECK(obs.samples()[3][0] == 1);
}

TEST_CASE("truncated Poisson pmf keeps mean, variance and mass") {
    for (double q : {0.05, 0.5, 2.0, 50.0, 1000.0}) {
        const PoissonReference ref({q});
        const auto pmf = ref.marginal_pmf(0);
        double mass = 0.0, mean = 0.0, second = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            mass += pmf[k];
            mean += k * pmf[k];
            second += double(k) * k * pmf[k];
        }
        CHECK(1.0 - mass < 1e-12);
        CHECK(mean == doctest::Approx(q).epsilon(1e-9));
        CHECK(second - mean * mean == doctest::Approx(q).epsilon(1e-9));
    }
}

TEST_CASE("distance to a reference law") {
    SUBCASE("identical distributions") {
        const TabularReference ref({{0}, {1}}, {0.25, 0.75});
        EmpiricalMarginal m;
        m.add(std::vector<Count>{0}, 25);
        m.add(std::vector<Count>{1}, 75);
        const auto d = poisson_distance(m, ref);
        CHECK(d.total_variation == 0.0);
        CHECK(d.mean_error == 0.0);
        CHECK(d.chi_square == 0.0);
    }
    SUBCASE("exact Poisson(2) samples") {
        Philox rng = Philox::for_replica(314, 0);
        std::poisson_distribution<Count> pois(2.0);
        EmpiricalMarginal m;
        EmpiricalMarginal reversed;
        std::vector<Count> draws;
        for (int i = 0; i < 10000; ++i) draws.push_back(pois(rng));
        for (Count k : draws) m.add(std::span<const Count>(&k, 1));
        for (auto it = draws.rbegin(); it != draws.rend(); ++it) reversed.add(std::span<const Count>(&*it, 1));
        const PoissonReference ref({2.0});
        const auto d = poisson_distance(m, ref);
        CHECK(d.total_variation < 0.02);
        CHECK(d.chi_square_pvalue > 1e-3);
        CHECK(!d.degenerate);
        const auto e = poisson_distance(reversed, ref);
        CHECK(e.total_variation == d.total_variation);
        CHECK(e.chi_square == d.chi_square);
    }
    SUBCASE("a single observed state is degenerate") {
        EmpiricalMarginal m;
        m.add(std::vector<Count>{2}, 500);
        const auto d = poisson_distance(m, PoissonReference({2.0}));
        CHECK(d.degenerate);
        CHECK(d.total_variation == doctest::Approx(1.0 - poisson_pmf(2, 2.0)));
    }
    SUBCASE("two-dimensional product form") {
        const PoissonReference ref({1.0, 3.0});
        CHECK(ref.pmf(std::vector<Count>{1, 2}) ==
              doctest::Approx(poisson_pmf(1, 1.0) * poisson_pmf(2, 3.0)));
        CHECK(ref.support().size() == std::size_t((ref.truncation(0) + 1) * (ref.truncation(1) + 1)));
    }
}
