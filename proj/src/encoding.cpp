#include "nctma/encoding.hpp"

namespace nctma {

std::vector<std::vector<int>> EncodedGraph::adjacency() const {
    std::vector<std::vector<int>> adj(nodeTypes.size());
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

EncodedGraph encode(const Network& n) {
    EncodedGraph g;

    auto addNode = [&g](NodeType type, double f0, double f1) {
        std::array<double, kFeatureWidth> feat{};
        feat[static_cast<int>(type)] = 1.0;
        feat[4] = f0;
        feat[5] = f1;
        g.nodeTypes.push_back(type);
        g.features.push_back(feat);
        return static_cast<int>(g.nodeTypes.size()) - 1;
    };

    for (const Server& s : n.servers)
        addNode(NodeType::Server, s.service.rate, s.service.latency);
    for (const Flow& f : n.flows)
        addNode(NodeType::Flow, f.arrival.rate, f.arrival.burst);

    for (const auto& [from, to] : n.links) g.edges.push_back({from, to});

    const int S = static_cast<int>(n.servers.size());
    for (const Flow& f : n.flows) {
        const int flowNode = S + f.id;
        g.flowPathLen[f.id] = static_cast<int>(f.path.size());
        for (std::size_t hop = 0; hop < f.path.size(); ++hop) {
            const int po = addNode(NodeType::PathOrder, static_cast<double>(hop + 1), 0.0);
            g.edges.push_back({flowNode, po});
            g.edges.push_back({po, f.path[hop]});
        }
    }
    for (const Flow& f : n.flows) {
        const int flowNode = S + f.id;
        for (int boundary = 1; boundary < static_cast<int>(f.path.size()); ++boundary) {
            const int cut = addNode(NodeType::Cut, 0.0, 0.0);
            g.cutIndex[{f.id, boundary}] = cut;
            g.edges.push_back({cut, flowNode});
            g.edges.push_back({cut, f.path[boundary - 1]});
            g.edges.push_back({cut, f.path[boundary]});
        }
    }
    return g;
}

}  // namespace nctma
