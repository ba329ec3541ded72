#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "nctma/dataset.hpp"
#include "nctma/eval.hpp"
#include "nctma/generators.hpp"
#include "nctma/network.hpp"

using namespace nctma;

namespace {

Network twoChain() {
    Network n;
    n.servers = {{0, {1.0, 0.5}}, {1, {1.0, 0.5}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.2, 0.3}, {0, 1}}};
    return n;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/nctma_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("validate accepts a two-server chain") {
    const ValidationReport r = validate(twoChain());
    CHECK(r.ok());
    CHECK(r.unstableServers.empty());
}

TEST_CASE("validate rejects cycles") {
    Network n = twoChain();
    n.links.insert({1, 0});
    const ValidationReport r = validate(n);
    CHECK_FALSE(r.ok());
}

TEST_CASE("validate rejects paths off links") {
    Network n = twoChain();
    n.servers.push_back({2, {1.0, 0.5}});
    n.flows[0].path = {0, 2};
    const ValidationReport r = validate(n);
    CHECK_FALSE(r.ok());
}

TEST_CASE("validate flags unstable servers as warnings") {
    Network n = twoChain();
    n.flows[0].arrival.rate = 1.5;
    const ValidationReport r = validate(n);
    CHECK(r.ok());
    CHECK(r.unstableServers.size() == 2);
}

TEST_CASE("tandem generator") {
    GeneratorParams p;
    p.topology = Topology::Tandem;
    p.serverCount = 6;
    p.flowCount = 9;
    p.seed = 7;

    const Network a = generate(p);
    const Network b = generate(p);
    CHECK(toJsonLine(a) == toJsonLine(b));  // same seed, same network

    CHECK(a.servers.size() == 6);
    CHECK(a.links.size() == 5);
    CHECK(validate(a).ok());
    CHECK(validate(a).unstableServers.empty());

    for (const Flow& f : a.flows) {
        for (std::size_t h = 0; h + 1 < f.path.size(); ++h)
            CHECK(f.path[h] + 1 == f.path[h + 1]);  // contiguous interval
        CHECK(f.arrival.rate > 0.0);
        CHECK(f.arrival.rate <= 1.0);
        CHECK(f.arrival.burst > 0.0);
        CHECK(f.arrival.burst <= 1.0);
    }
    for (const Server& s : a.servers) {
        CHECK(s.service.rate > 0.0);
        CHECK(s.service.rate <= 1.0);
        CHECK(s.service.latency > 0.0);
        CHECK(s.service.latency <= 1.0);
    }
}

TEST_CASE("tree generator") {
    GeneratorParams p;
    p.topology = Topology::Tree;
    p.serverCount = 9;
    p.flowCount = 12;
    p.seed = 13;

    const Network n = generate(p);
    CHECK(n.links.size() == 8);  // S-1 edges
    CHECK(validate(n).ok());
    CHECK(validate(n).unstableServers.empty());
    CHECK(toJsonLine(generate(p)) == toJsonLine(n));

    // Every hop must follow the unique outgoing (toward-root) link.
    for (const Flow& f : n.flows) {
        for (std::size_t h = 0; h + 1 < f.path.size(); ++h)
            CHECK(n.links.count({f.path[h], f.path[h + 1]}) == 1);
    }
}

TEST_CASE("erdos-renyi generator") {
    GeneratorParams p;
    p.topology = Topology::ErdosRenyi;
    p.serverCount = 4;
    p.flowCount = 3;
    p.edgeProbability = 1.0;
    p.seed = 3;

    const Network n = generate(p);
    CHECK(n.links.size() == 6);  // complete DAG on 4 nodes
    CHECK(validate(n).ok());
    for (const auto& [from, to] : n.links) CHECK(from < to);
    CHECK(toJsonLine(generate(p)) == toJsonLine(n));
}

TEST_CASE("erdos-renyi fails loudly on edgeless graphs") {
    GeneratorParams p;
    p.topology = Topology::ErdosRenyi;
    p.serverCount = 5;
    p.flowCount = 1;
    p.edgeProbability = 1e-12;
    p.seed = 5;
    CHECK_THROWS_AS(generate(p), GenerationFailed);
}

TEST_CASE("generator outputs stay valid and stable over many draws") {
    for (int id = 0; id < 300; ++id) {
        GeneratorParams p;
        p.topology = static_cast<Topology>(id % 3);
        p.serverCount = 2 + id % 9;
        p.flowCount = 1 + id % 13;
        p.edgeProbability = 0.8;
        p.seed = 1000 + id;
        const Network n = generate(p);
        const ValidationReport r = validate(n);
        CHECK(r.ok());
        CHECK(r.unstableServers.empty());
        CHECK(static_cast<int>(n.servers.size()) == p.serverCount);
        CHECK(static_cast<int>(n.flows.size()) == p.flowCount);
    }
}

TEST_CASE("dataset round-trip is byte identical") {
    std::vector<Network> nets;
    for (int id = 0; id < 100; ++id) {
        GeneratorParams p;
        p.topology = static_cast<Topology>(id % 2);  // tandem, tree
        p.serverCount = 2 + id % 7;
        p.flowCount = 1 + id % 11;
        p.seed = id;
        nets.push_back(generate(p));
        nets.back().id = id;
    }
    nets[4].labels = std::vector<FlowLabel>{{0, {1, 2}, 3.5}, {2, {}, 0.25}};

    TempFile f1("roundtrip1.jsonl"), f2("roundtrip2.jsonl");
    saveDataset(nets, f1.path);
    std::vector<Network> loaded = loadDataset(f1.path);
    saveDataset(loaded, f2.path);

    std::ifstream a(f1.path), b(f2.path);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());

    REQUIRE(loaded[4].labels.has_value());
    CHECK(loaded[4].labels->size() == 2);
    CHECK(loaded[4].labels->at(0).cuts == std::vector<int>{1, 2});
    CHECK(loaded[4].labels->at(1).delay == 0.25);
}

TEST_CASE("distribution sanity over 1000 networks") {
    GenerateOptions opts;
    opts.count = 1000;
    opts.minServers = 2;
    opts.maxServers = 12;
    opts.minFlows = 3;
    opts.maxFlows = 40;
    opts.seed = 321;
    const std::vector<Network> nets = generateNetworks(opts);
    int minServers = 1 << 20, maxServers = 0, minFlows = 1 << 20, maxFlows = 0;
    for (const Network& n : nets) {
        minServers = std::min(minServers, static_cast<int>(n.servers.size()));
        maxServers = std::max(maxServers, static_cast<int>(n.servers.size()));
        minFlows = std::min(minFlows, static_cast<int>(n.flows.size()));
        maxFlows = std::max(maxFlows, static_cast<int>(n.flows.size()));
        const ValidationReport r = validate(n);
        CHECK(r.ok());
        CHECK(r.unstableServers.empty());
    }
    CHECK(minServers >= 2);
    CHECK(maxServers <= 12);
    CHECK(minFlows >= 3);
    CHECK(maxFlows <= 40);
}

TEST_CASE("dataset schema errors carry the line number") {
    TempFile f("badschema.jsonl");
    {
        std::ofstream out(f.path);
        out << toJsonLine(twoChain()) << "\n";
        out << R"({"id": 1, "servers": [], "links": []})" << "\n";  // no "flows"
    }
    try {
        loadDataset(f.path);
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("flows") != std::string::npos);
    }
}
