#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "nctma/curves.hpp"
#include "nctma/network.hpp"

namespace nctma {

// A tandem decomposition of a flow's path: cut positions in 1..k-1, where
// boundary i separates path positions i-1 and i. Empty = the full tandem.
struct Decomposition {
    std::vector<int> cuts;  // ascending, unique

    bool operator==(const Decomposition&) const = default;

    // Bitmask encoding: bit (i-1) set means a cut at boundary i.
    std::uint32_t toMask() const;
    static Decomposition fromMask(std::uint32_t mask, int pathLen);
};

struct DelayResult {
    Delay delay;
    Decomposition decomposition;
    std::uint64_t evaluatedCount = 0;
};

// All 2^(k-1) decompositions for a path of k servers, in ascending bitmask
// order. Path lengths above 21 are refused (enumeration would not fit a
// sane budget; callers cap earlier).
std::vector<Decomposition> enumerateDecompositions(const Flow& foi);

// Per-network analysis context. Caches cross-traffic arrival bounds (shared
// by every decomposition of every flow) and per-flow sub-tandem residuals.
// One instance per thread; all methods are deterministic.
class TandemAnalysis {
public:
    explicit TandemAnalysis(const Network& net);

    // Arrival bound of flow f entering position s of its own path: the
    // source token bucket pushed through each earlier server via the
    // per-server residual. Empty on instability anywhere upstream.
    std::optional<TokenBucket> arrivalBoundAt(const Flow& f, int position);

    // Residual rate-latency for the flow of interest over a contiguous
    // sub-path [from, to] of its path (positions, inclusive). Cross flows
    // are bounded where they first enter the segment; each pays its burst
    // once, against the segment's bottleneck residual rate.
    std::optional<RateLatency> subTandemLeftOver(const Flow& foi, int from, int to);

    // End-to-end bound for one decomposition: residuals of the segments
    // between cuts, convolved, then the horizontal deviation.
    Delay delayBound(const Flow& foi, const Decomposition& d);

    // Minimum over all decompositions; ties broken by fewest cuts, then
    // lowest bitmask.
    DelayResult exhaustiveTMA(const Flow& foi);

    // Baseline: `count` decompositions with every boundary an independent
    // fair coin, deduplicated; falls back to exhaustive when count covers
    // the whole space.
    DelayResult randomHeuristic(const Flow& foi, std::uint64_t count, std::uint64_t seed);

    // Minimum bound over an explicit candidate list (used by the prediction
    // heuristics); same tie-breaking as the exhaustive search.
    DelayResult bestOf(const Flow& foi, const std::vector<Decomposition>& candidates);

    const Network& network() const { return net_; }

private:
    const Network& net_;
    // position of server s on flow f's path, or -1
    std::vector<std::vector<int>> posOnPath_;
    // flows crossing each server
    std::vector<std::vector<int>> flowsAtServer_;

    struct CacheEntry {
        bool computed = false;
        std::optional<TokenBucket> value;
    };
    std::vector<std::vector<CacheEntry>> arrivalCache_;  // [flow][position]

    struct SegmentEntry {
        bool computed = false;
        std::optional<RateLatency> value;
    };
    // [flow][from * k + to]
    std::vector<std::vector<SegmentEntry>> segmentCache_;
};

}  // namespace nctma
