#include "nctma/network.hpp"

#include <unordered_set>

namespace nctma {

namespace {

std::string fmt(const char* what, int a, int b = -1) {
    std::string s(what);
    s += " " + std::to_string(a);
    if (b >= 0) s += "," + std::to_string(b);
    return s;
}

}  // namespace

ValidationReport validate(const Network& n) {
    ValidationReport report;
    const int S = static_cast<int>(n.servers.size());

    for (int i = 0; i < S; ++i) {
        if (n.servers[i].id != i) {
            report.violations.push_back(fmt("server ids not dense at index", i));
            break;
        }
    }

    for (const auto& [from, to] : n.links) {
        if (from < 0 || from >= S || to < 0 || to >= S || from == to) {
            report.violations.push_back(fmt("link endpoint out of range", from, to));
        }
    }

    // Kahn's algorithm on the link graph; leftover nodes sit on a cycle.
    {
        std::vector<int> indeg(S, 0);
        for (const auto& [from, to] : n.links) {
            if (from >= 0 && from < S && to >= 0 && to < S) indeg[to]++;
        }
        std::vector<int> queue;
        for (int i = 0; i < S; ++i)
            if (indeg[i] == 0) queue.push_back(i);
        int seen = 0;
        while (!queue.empty()) {
            int v = queue.back();
            queue.pop_back();
            ++seen;
            for (const auto& [from, to] : n.links) {
                if (from == v && --indeg[to] == 0) queue.push_back(to);
            }
        }
        if (seen != S) report.violations.push_back("cycle in link graph");
    }

    std::unordered_set<int> flowIds;
    for (std::size_t i = 0; i < n.flows.size(); ++i) {
        const Flow& f = n.flows[i];
        if (f.id != static_cast<int>(i)) {
            report.violations.push_back(fmt("flow ids not dense at index", static_cast<int>(i)));
        }
        if (!flowIds.insert(f.id).second) {
            report.violations.push_back(fmt("duplicate flow id", f.id));
        }
        if (f.path.empty()) {
            report.violations.push_back(fmt("empty path for flow", f.id));
            continue;
        }
        std::unordered_set<int> onPath;
        for (int s : f.path) {
            if (s < 0 || s >= S) {
                report.violations.push_back(fmt("path server out of range for flow", f.id));
                break;
            }
            if (!onPath.insert(s).second) {
                report.violations.push_back(fmt("repeated server on path of flow", f.id));
                break;
            }
        }
        for (std::size_t h = 0; h + 1 < f.path.size(); ++h) {
            if (!n.links.count({f.path[h], f.path[h + 1]})) {
                report.violations.push_back(
                    fmt("flow path uses missing link", f.path[h], f.path[h + 1]));
            }
        }
    }

    // Stability warnings: token-bucket rates are conserved through servers,
    // so the raw sum per server is the exact long-run arrival rate.
    std::vector<double> load(S, 0.0);
    for (const Flow& f : n.flows) {
        for (int s : f.path) {
            if (s >= 0 && s < S) load[s] += f.arrival.rate;
        }
    }
    for (int s = 0; s < S; ++s) {
        if (load[s] >= n.servers[s].service.rate) report.unstableServers.push_back(s);
    }

    return report;
}

}  // namespace nctma
