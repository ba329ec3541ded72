#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nctma/generators.hpp"
#include "nctma/rng.hpp"
#include "nctma/tma.hpp"
#include "support/fixtures.hpp"
#include "support/minplus_oracle.hpp"

using namespace nctma;

namespace {
constexpr double kTol = 1e-9;
}

TEST_CASE("enumerateDecompositions counts and order") {
    Flow f1{0, {0.1, 0.1}, {0}};
    CHECK(enumerateDecompositions(f1).size() == 1);
    CHECK(enumerateDecompositions(f1)[0].cuts.empty());

    Flow f3{0, {0.1, 0.1}, {0, 1, 2}};
    const auto d3 = enumerateDecompositions(f3);
    REQUIRE(d3.size() == 4);
    CHECK(d3[0].cuts == std::vector<int>{});
    CHECK(d3[1].cuts == std::vector<int>{1});
    CHECK(d3[2].cuts == std::vector<int>{2});
    CHECK(d3[3].cuts == std::vector<int>{1, 2});

    std::vector<int> path17(17);
    for (int i = 0; i < 17; ++i) path17[i] = i;
    Flow f17{0, {0.1, 0.1}, path17};
    CHECK(enumerateDecompositions(f17).size() == 65536);
}

TEST_CASE("decomposition mask round trip") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const int k = 1 + static_cast<int>(rng.uniformInt(0, 15));
        const std::uint32_t mask =
            static_cast<std::uint32_t>(rng.uniformInt(0, (1u << (k - 1)) - 1));
        CHECK(Decomposition::fromMask(mask, k).toMask() == mask);
    }
}

TEST_CASE("arrivalBoundAt") {
    const Network a = fixtures::exampleA();
    TandemAnalysis analysis(a);

    // At the first server the bound is the source curve.
    const auto atSource = analysis.arrivalBoundAt(a.flows[1], 0);
    REQUIRE(atSource.has_value());
    CHECK(*atSource == a.flows[1].arrival);

    // After server 0 the cross flow pays the foi's contention.
    const auto afterFirst = analysis.arrivalBoundAt(a.flows[1], 1);
    REQUIRE(afterFirst.has_value());
    CHECK(afterFirst->rate == doctest::Approx(0.2));
    CHECK(afterFirst->burst ==
          doctest::Approx(fixtures::kExampleACrossBoundBurst).epsilon(kTol));
}

TEST_CASE("subTandemLeftOver degenerate cases") {
    // No cross traffic: reduces to plain convolution.
    Network n;
    n.servers = {{0, {1.0, 1.0}}, {1, {2.0, 1.0}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.5, 1.0}, {0, 1}}};
    TandemAnalysis an(n);
    const auto lo = an.subTandemLeftOver(n.flows[0], 0, 1);
    REQUIRE(lo.has_value());
    CHECK(lo->rate == doctest::Approx(1.0));
    CHECK(lo->latency == doctest::Approx(2.0));

    // Single server with one cross equals leftOverSingle.
    const Network a = fixtures::exampleA();
    TandemAnalysis anA(a);
    const auto single = anA.subTandemLeftOver(a.flows[0], 0, 0);
    const auto direct = leftOverSingle(a.servers[0].service, a.flows[1].arrival);
    REQUIRE(single.has_value());
    REQUIRE(direct.has_value());
    CHECK(single->rate == doctest::Approx(direct->rate));
    CHECK(single->latency == doctest::Approx(direct->latency));

    // Full example-A tandem.
    const auto full = anA.subTandemLeftOver(a.flows[0], 0, 1);
    REQUIRE(full.has_value());
    CHECK(full->rate == doctest::Approx(0.8));
    CHECK(full->latency == doctest::Approx(3.125));
}

TEST_CASE("example A bounds in both directions") {
    const Network a = fixtures::exampleA();
    TandemAnalysis an(a);
    const Flow& foi = a.flows[0];

    const Delay noCut = an.delayBound(foi, {{}});
    const Delay cut = an.delayBound(foi, {{1}});
    CHECK(noCut.value() == doctest::Approx(fixtures::kExampleANoCut).epsilon(kTol));
    CHECK(cut.value() == doctest::Approx(fixtures::kExampleACut).epsilon(kTol));

    // Independent check: residual parameters re-derived by hand, deviation
    // evaluated numerically.
    CHECK(noCut.value() ==
          doctest::Approx(oracle::horizontalDeviationNumeric(0.1, 1.0, 0.8, 3.125, {0, 50, 1e-3}))
              .epsilon(1e-9));

    const DelayResult best = an.exhaustiveTMA(foi);
    CHECK(best.delay.value() == doctest::Approx(fixtures::kExampleANoCut));
    CHECK(best.decomposition.cuts.empty());
    CHECK(best.evaluatedCount == 2);
}

TEST_CASE("example B bounds in both directions") {
    const Network b = fixtures::exampleB();
    TandemAnalysis an(b);
    const Flow& foi = b.flows[0];

    CHECK(an.delayBound(foi, {{}}).value() ==
          doctest::Approx(fixtures::kExampleBNoCut).epsilon(kTol));
    CHECK(an.delayBound(foi, {{1}}).value() ==
          doctest::Approx(fixtures::kExampleBCut).epsilon(kTol));

    const DelayResult best = an.exhaustiveTMA(foi);
    CHECK(best.delay.value() == doctest::Approx(fixtures::kExampleBCut).epsilon(kTol));
    CHECK(best.decomposition.cuts == std::vector<int>{1});
}

TEST_CASE("cross-free tandems are decomposition invariant") {
    Network n;
    n.servers = {{0, {1.0, 1.0}}, {1, {2.0, 1.0}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.5, 1.0}, {0, 1}}};
    TandemAnalysis an(n);
    CHECK(an.delayBound(n.flows[0], {{}}).value() == doctest::Approx(3.0));
    CHECK(an.delayBound(n.flows[0], {{1}}).value() == doctest::Approx(3.0));
}

TEST_CASE("single-server flow") {
    const Network b = fixtures::exampleB();
    TandemAnalysis an(b);
    const DelayResult r = an.exhaustiveTMA(b.flows[1]);  // k = 1
    CHECK(r.evaluatedCount == 1);
    // Residual at the fast server after the foi's contention.
    const auto foiBound = an.arrivalBoundAt(b.flows[0], 1);
    REQUIRE(foiBound.has_value());
    const auto residual = leftOverSingle(b.servers[1].service, *foiBound);
    REQUIRE(residual.has_value());
    CHECK(r.delay.value() ==
          doctest::Approx(horizontalDeviation(b.flows[1].arrival, *residual).value()));
}

TEST_CASE("delayBound rejects malformed decompositions") {
    const Network a = fixtures::exampleA();
    TandemAnalysis an(a);
    CHECK_THROWS_AS(an.delayBound(a.flows[0], {{2}}), std::invalid_argument);
    CHECK_THROWS_AS(an.delayBound(a.flows[0], {{0}}), std::invalid_argument);
    CHECK_THROWS_AS(an.delayBound(a.flows[0], {{1, 1}}), std::invalid_argument);
}

TEST_CASE("unstable cross traffic yields unbounded delay") {
    Network n;
    n.servers = {{0, {1.0, 1.0}}, {1, {1.0, 1.0}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.3, 1.0}, {0, 1}}, {1, {1.2, 0.5}, {0, 1}}};  // cross overloads both
    TandemAnalysis an(n);
    CHECK(an.delayBound(n.flows[0], {{}}).isUnbounded());
    CHECK(an.exhaustiveTMA(n.flows[0]).delay.isUnbounded());
}

TEST_CASE("random heuristic") {
    const Network a = fixtures::exampleA();
    TandemAnalysis an(a);
    const Flow& foi = a.flows[0];

    // Full coverage falls back to the exhaustive search.
    const DelayResult all = an.randomHeuristic(foi, 2, 99);
    CHECK(all.delay.value() == doctest::Approx(fixtures::kExampleANoCut));

    const DelayResult r1 = an.randomHeuristic(foi, 1, 123);
    const DelayResult r2 = an.randomHeuristic(foi, 1, 123);
    CHECK(r1.delay.value() == r2.delay.value());
    CHECK(r1.decomposition == r2.decomposition);
    CHECK(r1.delay.value() >= an.exhaustiveTMA(foi).delay.value() - 1e-12);
}

TEST_CASE("oracle dominance and burst monotonicity over random networks") {
    Rng seeds(2024);
    for (int trial = 0; trial < 60; ++trial) {
        GeneratorParams p;
        p.topology = static_cast<Topology>(trial % 3);
        p.serverCount = 2 + trial % 6;
        p.flowCount = 1 + trial % 8;
        p.edgeProbability = 0.8;
        p.seed = seeds.next();
        Network n = generate(p);

        TandemAnalysis an(n);
        for (const Flow& foi : n.flows) {
            const DelayResult best = an.exhaustiveTMA(foi);
            REQUIRE(best.delay.isFinite());
            for (const Decomposition& d : enumerateDecompositions(foi)) {
                CHECK(an.delayBound(foi, d).value() >= best.delay.value() - 1e-12);
            }
            const DelayResult rnd = an.randomHeuristic(foi, 2, p.seed);
            CHECK(rnd.delay.value() >= best.delay.value() - 1e-12);
        }

        // Bump one burst; no bound may decrease.
        Network bumped = n;
        const int victim = trial % static_cast<int>(n.flows.size());
        bumped.flows[victim].arrival.burst += 0.37;
        TandemAnalysis anBumped(bumped);
        for (const Flow& foi : n.flows) {
            for (const Decomposition& d : enumerateDecompositions(foi)) {
                const Delay before = an.delayBound(foi, d);
                const Delay after = anBumped.delayBound(bumped.flows[foi.id], d);
                CHECK(after.value() >= before.value() - 1e-12);
            }
        }
    }
}

TEST_CASE("no-cross invariance across random cross-free tandems") {
    Rng seeds(515);
    for (int trial = 0; trial < 50; ++trial) {
        const int servers = 2 + trial % 5;
        Network n;
        double minRate = 1.0;
        for (int s = 0; s < servers; ++s) {
            n.servers.push_back({s, {seeds.uniform01(), seeds.uniform01()}});
            minRate = std::min(minRate, n.servers.back().service.rate);
            if (s > 0) n.links.insert({s - 1, s});
        }
        Flow foi{0, {0.5 * minRate, seeds.uniform01()}, {}};
        for (int s = 0; s < servers; ++s) foi.path.push_back(s);
        n.flows = {foi};

        TandemAnalysis an(n);
        const Delay reference = an.delayBound(n.flows[0], {{}});
        for (const Decomposition& d : enumerateDecompositions(n.flows[0])) {
            CHECK(an.delayBound(n.flows[0], d).value() ==
                  doctest::Approx(reference.value()).epsilon(1e-9));
        }
    }
}
