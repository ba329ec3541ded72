#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nctma/curves.hpp"

namespace nctma {

struct Server {
    int id = 0;
    RateLatency service;
};

struct Flow {
    int id = 0;
    TokenBucket arrival;
    std::vector<int> path;  // server ids, in traversal order, no repeats
};

// Exhaustive-search result attached to a flow in a labeled dataset.
struct FlowLabel {
    int flow = 0;
    std::vector<int> cuts;  // boundary indices, ascending
    double delay = 0.0;
};

// Feed-forward server graph. Links are directed (from, to) pairs; flows
// follow links. Labels are present only in labeled datasets.
struct Network {
    int id = 0;
    std::vector<Server> servers;
    std::set<std::pair<int, int>> links;
    std::vector<Flow> flows;
    std::optional<std::vector<FlowLabel>> labels;
};

enum class Topology { Tandem, Tree, ErdosRenyi };

struct GeneratorParams {
    Topology topology = Topology::Tandem;
    int serverCount = 2;
    int flowCount = 1;
    double edgeProbability = 0.3;  // erdos-renyi only
    double utilizationCap = 0.9;   // in (0,1]
    std::uint64_t seed = 0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<int> unstableServers;  // warnings, not violations

    bool ok() const { return violations.empty(); }
};

// Structural checks: dense ids, acyclic link graph, paths on links, no
// repeated servers on a path. Servers whose aggregate flow rate reaches
// their service rate are flagged as warnings.
ValidationReport validate(const Network& n);

}  // namespace nctma
