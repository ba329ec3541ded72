#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "nctma/encoding.hpp"
#include "nctma/generators.hpp"
#include "support/fixtures.hpp"

using namespace nctma;

namespace {

// Expected node count: S + F + sum(k_f) + sum(max(k_f - 1, 0)).
int expectedNodes(const Network& n) {
    int count = static_cast<int>(n.servers.size() + n.flows.size());
    for (const Flow& f : n.flows) {
        count += static_cast<int>(f.path.size());
        count += std::max<int>(0, static_cast<int>(f.path.size()) - 1);
    }
    return count;
}

int expectedEdges(const Network& n) {
    int count = static_cast<int>(n.links.size());
    for (const Flow& f : n.flows) {
        count += 2 * static_cast<int>(f.path.size());                       // flow-po, po-server
        count += 3 * std::max<int>(0, static_cast<int>(f.path.size()) - 1);  // cut wiring
    }
    return count;
}

}  // namespace

TEST_CASE("two-server chain with one flow") {
    Network n;
    n.servers = {{0, {0.5, 0.25}}, {1, {1.0, 0.75}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.2, 0.4}, {0, 1}}};

    const EncodedGraph g = encode(n);
    CHECK(g.nodeCount() == 6);  // 2 servers + 1 flow + 2 path order + 1 cut
    CHECK(g.edges.size() == 8);

    CHECK(g.nodeTypes[0] == NodeType::Server);
    CHECK(g.features[0] == std::array<double, 6>{1, 0, 0, 0, 0.5, 0.25});
    CHECK(g.features[2] == std::array<double, 6>{0, 1, 0, 0, 0.2, 0.4});

    // Path order carries the 1-based hop count.
    CHECK(g.nodeTypes[3] == NodeType::PathOrder);
    CHECK(g.features[3][4] == 1.0);
    CHECK(g.features[4][4] == 2.0);

    const int cut = g.cutIndex.at({0, 1});
    CHECK(g.nodeTypes[cut] == NodeType::Cut);
    CHECK(g.features[cut] == std::array<double, 6>{0, 0, 0, 1, 0, 0});

    const auto adj = g.adjacency();
    CHECK(adj[cut].size() == 3);
    CHECK(g.flowPathLen.at(0) == 2);
}

TEST_CASE("single-hop flows have no cut nodes") {
    Network n;
    n.servers = {{0, {1.0, 0.5}}};
    n.links = {};
    n.flows = {{0, {0.1, 0.1}, {0}}};
    const EncodedGraph g = encode(n);
    CHECK(g.cutIndex.empty());
    CHECK(g.nodeCount() == 3);  // server + flow + one path order
}

TEST_CASE("count formulas and degree invariants on generated networks") {
    for (int trial = 0; trial < 40; ++trial) {
        GeneratorParams p;
        p.topology = static_cast<Topology>(trial % 3);
        p.serverCount = 2 + trial % 7;
        p.flowCount = 1 + trial % 9;
        p.edgeProbability = 0.8;
        p.seed = 100 + trial;
        const Network n = generate(p);
        const EncodedGraph g = encode(n);

        CHECK(g.nodeCount() == expectedNodes(n));
        CHECK(static_cast<int>(g.edges.size()) == expectedEdges(n));

        const auto adj = g.adjacency();
        for (int v = 0; v < g.nodeCount(); ++v) {
            if (g.nodeTypes[v] == NodeType::Cut) CHECK(adj[v].size() == 3);
            if (g.nodeTypes[v] == NodeType::PathOrder) CHECK(adj[v].size() == 2);
        }
    }
}

TEST_CASE("encoding is deterministic") {
    const Network a = fixtures::exampleA();
    const EncodedGraph g1 = encode(a);
    const EncodedGraph g2 = encode(a);
    CHECK(g1.nodeTypes == g2.nodeTypes);
    CHECK(g1.features == g2.features);
    CHECK(g1.edges == g2.edges);
    CHECK(g1.cutIndex == g2.cutIndex);
}

TEST_CASE("server relabeling keeps canonical invariants") {
    GeneratorParams p;
    p.topology = Topology::ErdosRenyi;
    p.serverCount = 6;
    p.flowCount = 5;
    p.edgeProbability = 0.7;
    p.seed = 77;
    const Network n = generate(p);

    // Reverse the server ids.
    const int S = static_cast<int>(n.servers.size());
    Network perm = n;
    for (Server& s : perm.servers) s.id = S - 1 - s.id;
    std::sort(perm.servers.begin(), perm.servers.end(),
              [](const Server& a, const Server& b) { return a.id < b.id; });
    perm.links.clear();
    for (const auto& [a, b] : n.links) perm.links.insert({S - 1 - a, S - 1 - b});
    for (Flow& f : perm.flows)
        for (int& s : f.path) s = S - 1 - s;

    const EncodedGraph g1 = encode(n);
    const EncodedGraph g2 = encode(perm);
    CHECK(g1.nodeCount() == g2.nodeCount());
    CHECK(g1.edges.size() == g2.edges.size());

    auto degreeHistogram = [](const EncodedGraph& g) {
        std::vector<int> degrees;
        for (const auto& nbrs : g.adjacency()) degrees.push_back(static_cast<int>(nbrs.size()));
        std::sort(degrees.begin(), degrees.end());
        return degrees;
    };
    CHECK(degreeHistogram(g1) == degreeHistogram(g2));

    auto typeCounts = [](const EncodedGraph& g) {
        std::array<int, 4> counts{};
        for (NodeType t : g.nodeTypes) counts[static_cast<int>(t)]++;
        return counts;
    };
    CHECK(typeCounts(g1) == typeCounts(g2));
}
