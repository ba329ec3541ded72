#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "nctma/network.hpp"

namespace nctma {

enum class NodeType : int { Server = 0, Flow = 1, PathOrder = 2, Cut = 3 };

// One-hot of the 4 node types plus two payload slots:
//   server:    [1,0,0,0, rate, latency]
//   flow:      [0,1,0,0, rate, burst]
//   pathOrder: [0,0,1,0, hop (1-based), 0]
//   cut:       [0,0,0,1, 0, 0]
constexpr int kFeatureWidth = 6;

struct EncodedGraph {
    std::vector<NodeType> nodeTypes;
    std::vector<std::array<double, kFeatureWidth>> features;
    std::vector<std::pair<int, int>> edges;  // undirected
    std::map<std::pair<int, int>, int> cutIndex;  // (flow id, boundary) -> node
    std::map<int, int> flowPathLen;

    int nodeCount() const { return static_cast<int>(nodeTypes.size()); }

    // Neighbor lists in deterministic order (edge insertion order).
    std::vector<std::vector<int>> adjacency() const;
};

// Whole-network typed graph: server nodes mirroring links, one flow node per
// flow connected through per-hop path-ordering nodes, and one cut node per
// potential boundary of every flow (k >= 2), wired to its flow and to the
// pair of servers around the boundary. Node order is servers, flows,
// path-order nodes grouped by flow, then cut nodes in (flow, boundary) order.
EncodedGraph encode(const Network& n);

}  // namespace nctma
