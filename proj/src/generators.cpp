#include "nctma/generators.hpp"

#include <algorithm>
#include <cassert>

#include "nctma/rng.hpp"

namespace nctma {

namespace {

constexpr int kPathRetries = 1000;

// Drawing order is part of the dataset format: server curves first (rate,
// latency per server), then per flow the route draws, then arrival curve
// (rate, burst). Changing it changes every generated dataset.
void drawServerCurves(Network& net, int serverCount, Rng& rng) {
    net.servers.resize(serverCount);
    for (int s = 0; s < serverCount; ++s) {
        net.servers[s].id = s;
        net.servers[s].service.rate = rng.uniform01();
        net.servers[s].service.latency = rng.uniform01();
    }
}

void drawArrivalCurve(Flow& f, Rng& rng) {
    f.arrival.rate = rng.uniform01();
    f.arrival.burst = rng.uniform01();
}

// Scales all flow rates by one common factor so that every server's
// aggregate arrival rate is at most cap times its service rate. A single
// global factor keeps the rate profile of the draw intact.
void enforceUtilizationCap(Network& net, double cap) {
    std::vector<double> load(net.servers.size(), 0.0);
    for (const Flow& f : net.flows)
        for (int s : f.path) load[s] += f.arrival.rate;

    double factor = 1.0;
    for (std::size_t s = 0; s < net.servers.size(); ++s) {
        if (load[s] <= 0.0) continue;
        factor = std::min(factor, cap * net.servers[s].service.rate / load[s]);
    }
    if (factor < 1.0) {
        for (Flow& f : net.flows) f.arrival.rate *= factor;
    }
}

}  // namespace

Network generateTandem(const GeneratorParams& p) {
    Rng rng(p.seed);
    Network net;
    drawServerCurves(net, p.serverCount, rng);
    for (int s = 0; s + 1 < p.serverCount; ++s) net.links.insert({s, s + 1});

    const std::uint64_t S = static_cast<std::uint64_t>(p.serverCount);
    const std::uint64_t intervals = S * (S + 1) / 2;
    net.flows.resize(p.flowCount);
    for (int fi = 0; fi < p.flowCount; ++fi) {
        Flow& f = net.flows[fi];
        f.id = fi;
        // Uniform over all contiguous intervals [i, j], i <= j.
        std::uint64_t u = rng.uniformInt(0, intervals - 1);
        std::uint64_t i = 0;
        while (u >= S - i) {
            u -= S - i;
            ++i;
        }
        const std::uint64_t j = i + u;
        for (std::uint64_t s = i; s <= j; ++s) f.path.push_back(static_cast<int>(s));
        drawArrivalCurve(f, rng);
    }
    enforceUtilizationCap(net, p.utilizationCap);
    return net;
}

Network generateTree(const GeneratorParams& p) {
    Rng rng(p.seed);
    Network net;
    drawServerCurves(net, p.serverCount, rng);

    const int S = p.serverCount;
    // Pruefer decode gives a uniform random labeled tree.
    std::vector<int> degree(S, 1);
    std::vector<int> pruefer(std::max(0, S - 2));
    for (int& x : pruefer) {
        x = static_cast<int>(rng.uniformInt(0, S - 1));
        degree[x]++;
    }
    std::vector<std::pair<int, int>> treeEdges;
    {
        std::vector<bool> used(S, false);
        for (int x : pruefer) {
            int leaf = -1;
            for (int v = 0; v < S; ++v) {
                if (degree[v] == 1 && !used[v]) {
                    leaf = v;
                    break;
                }
            }
            treeEdges.push_back({leaf, x});
            used[leaf] = true;
            degree[x]--;
        }
        int a = -1, b = -1;
        for (int v = 0; v < S; ++v) {
            if (!used[v] && degree[v] == 1) (a < 0 ? a : b) = v;
        }
        treeEdges.push_back({a, b});
    }

    const int root = static_cast<int>(rng.uniformInt(0, S - 1));
    std::vector<std::vector<int>> adj(S);
    for (auto [a, b] : treeEdges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> parent(S, -1), depth(S, 0), order{root};
    std::vector<bool> seen(S, false);
    seen[root] = true;
    for (std::size_t qi = 0; qi < order.size(); ++qi) {
        int v = order[qi];
        for (int u : adj[v]) {
            if (!seen[u]) {
                seen[u] = true;
                parent[u] = v;
                depth[u] = depth[v] + 1;
                order.push_back(u);
            }
        }
    }
    for (int v = 0; v < S; ++v)
        if (v != root) net.links.insert({v, parent[v]});

    net.flows.resize(p.flowCount);
    for (int fi = 0; fi < p.flowCount; ++fi) {
        Flow& f = net.flows[fi];
        f.id = fi;
        const int start = static_cast<int>(rng.uniformInt(0, S - 1));
        // Root-path segment: uniform hop count in [1, depth]; the root itself
        // yields a single-server path.
        int hops = depth[start] > 0
                       ? static_cast<int>(rng.uniformInt(1, depth[start]))
                       : 0;
        int v = start;
        f.path.push_back(v);
        for (int h = 0; h < hops; ++h) {
            v = parent[v];
            f.path.push_back(v);
        }
        drawArrivalCurve(f, rng);
    }
    enforceUtilizationCap(net, p.utilizationCap);
    return net;
}

Network generateErdosRenyi(const GeneratorParams& p) {
    Rng rng(p.seed);
    Network net;
    drawServerCurves(net, p.serverCount, rng);

    const int S = p.serverCount;
    std::vector<std::vector<int>> out(S);
    for (int i = 0; i < S; ++i) {
        for (int j = i + 1; j < S; ++j) {
            if (rng.uniform01() <= p.edgeProbability) {
                net.links.insert({i, j});
                out[i].push_back(j);
            }
        }
    }

    net.flows.resize(p.flowCount);
    for (int fi = 0; fi < p.flowCount; ++fi) {
        Flow& f = net.flows[fi];
        f.id = fi;
        bool placed = false;
        for (int attempt = 0; attempt < kPathRetries && !placed; ++attempt) {
            const int src = static_cast<int>(rng.uniformInt(0, S - 1));
            std::vector<bool> reachable(S, false);
            std::vector<int> stack{src};
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int u : out[v]) {
                    if (!reachable[u]) {
                        reachable[u] = true;
                        stack.push_back(u);
                    }
                }
            }
            std::vector<int> sinks;
            for (int v = 0; v < S; ++v)
                if (reachable[v]) sinks.push_back(v);
            if (sinks.empty()) continue;
            const int dst = sinks[rng.uniformInt(0, sinks.size() - 1)];

            // Path counts toward dst; sampling proportional to them yields a
            // uniform random directed simple path (all paths in a DAG are
            // simple). Counts can lose precision above 2^53 paths; sampling
            // stays valid and deterministic, just not exactly uniform.
            std::vector<double> count(S, 0.0);
            count[dst] = 1.0;
            for (int v = dst - 1; v >= src; --v) {
                for (int u : out[v])
                    if (u <= dst) count[v] += count[u];
            }
            assert(count[src] > 0.0);
            f.path.clear();
            int v = src;
            f.path.push_back(v);
            while (v != dst) {
                double r = rng.uniform01() * count[v];
                double acc = 0.0;
                int chosen = -1;
                for (int u : out[v]) {
                    if (u > dst || count[u] <= 0.0) continue;
                    acc += count[u];
                    chosen = u;
                    if (r <= acc) break;
                }
                v = chosen;
                f.path.push_back(v);
            }
            placed = true;
        }
        if (!placed) {
            throw GenerationFailed("no flow path placeable after " +
                                   std::to_string(kPathRetries) +
                                   " attempts; edge probability too low");
        }
        drawArrivalCurve(f, rng);
    }
    enforceUtilizationCap(net, p.utilizationCap);
    return net;
}

Network generate(const GeneratorParams& p) {
    switch (p.topology) {
        case Topology::Tandem: return generateTandem(p);
        case Topology::Tree: return generateTree(p);
        case Topology::ErdosRenyi: return generateErdosRenyi(p);
    }
    throw std::logic_error("unknown topology");
}

}  // namespace nctma
