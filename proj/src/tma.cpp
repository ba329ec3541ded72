#include "nctma/tma.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

#include "nctma/rng.hpp"

namespace nctma {

std::uint32_t Decomposition::toMask() const {
    std::uint32_t mask = 0;
    for (int c : cuts) mask |= 1u << (c - 1);
    return mask;
}

Decomposition Decomposition::fromMask(std::uint32_t mask, int pathLen) {
    Decomposition d;
    for (int b = 1; b < pathLen; ++b) {
        if (mask & (1u << (b - 1))) d.cuts.push_back(b);
    }
    return d;
}

std::vector<Decomposition> enumerateDecompositions(const Flow& foi) {
    const int k = static_cast<int>(foi.path.size());
    if (k > 21) throw std::length_error("path too long to enumerate decompositions");
    const std::uint32_t total = 1u << (k - 1);
    std::vector<Decomposition> out;
    out.reserve(total);
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        out.push_back(Decomposition::fromMask(mask, k));
    }
    return out;
}

TandemAnalysis::TandemAnalysis(const Network& net) : net_(net) {
    const int S = static_cast<int>(net.servers.size());
    const int F = static_cast<int>(net.flows.size());
    posOnPath_.assign(F, std::vector<int>(S, -1));
    flowsAtServer_.assign(S, {});
    arrivalCache_.resize(F);
    segmentCache_.resize(F);
    for (int fi = 0; fi < F; ++fi) {
        const auto& path = net.flows[fi].path;
        for (int pos = 0; pos < static_cast<int>(path.size()); ++pos) {
            posOnPath_[fi][path[pos]] = pos;
            flowsAtServer_[path[pos]].push_back(fi);
        }
        arrivalCache_[fi].resize(path.size());
        segmentCache_[fi].resize(path.size() * path.size());
    }
}

std::optional<TokenBucket> TandemAnalysis::arrivalBoundAt(const Flow& f, int position) {
    assert(position >= 0 && position < static_cast<int>(f.path.size()));
    CacheEntry& entry = arrivalCache_[f.id][position];
    if (entry.computed) return entry.value;
    entry.computed = true;  // feed-forwardness rules out re-entry

    if (position == 0) {
        entry.value = f.arrival;
        return entry.value;
    }

    // Push the bound at the previous hop through that hop's residual.
    std::optional<TokenBucket> bound = arrivalBoundAt(f, position - 1);
    if (bound) {
        const int server = f.path[position - 1];
        std::vector<TokenBucket> cross;
        for (int gi : flowsAtServer_[server]) {
            if (gi == f.id) continue;
            auto gb = arrivalBoundAt(net_.flows[gi], posOnPath_[gi][server]);
            if (!gb) {
                bound.reset();
                break;
            }
            cross.push_back(*gb);
        }
        if (bound) {
            auto residual = leftOverSingle(net_.servers[server].service, aggregate(cross));
            bound = residual ? outputBound(*bound, *residual) : std::nullopt;
        }
    }
    entry.value = bound;
    return entry.value;
}

std::optional<RateLatency> TandemAnalysis::subTandemLeftOver(const Flow& foi, int from, int to) {
    const int k = static_cast<int>(foi.path.size());
    assert(0 <= from && from <= to && to < k);
    SegmentEntry& entry = segmentCache_[foi.id][from * k + to];
    if (entry.computed) return entry.value;
    entry.computed = true;

    // Cross flows and the segment servers they share with the foi.
    struct Cross {
        TokenBucket bound;      // at entry into the segment
        double overlapLatency;  // sum of latencies of shared segment servers
    };
    std::vector<Cross> crossings;
    std::vector<double> rateAt(to - from + 1, 0.0);
    bool unstable = false;

    std::vector<int> seenFlows;
    for (int pos = from; pos <= to && !unstable; ++pos) {
        const int server = foi.path[pos];
        for (int gi : flowsAtServer_[server]) {
            if (gi == foi.id) continue;
            if (std::find(seenFlows.begin(), seenFlows.end(), gi) != seenFlows.end()) continue;
            seenFlows.push_back(gi);
            const Flow& g = net_.flows[gi];
            // First segment server on g's path = its entry into the segment.
            int entryPos = -1;
            double overlapLatency = 0.0;
            for (int p = from; p <= to; ++p) {
                const int gpos = posOnPath_[gi][foi.path[p]];
                if (gpos < 0) continue;
                if (entryPos < 0 || gpos < entryPos) entryPos = gpos;
                overlapLatency += net_.servers[foi.path[p]].service.latency;
                rateAt[p - from] += g.arrival.rate;
            }
            auto bound = arrivalBoundAt(g, entryPos);
            if (!bound) {
                unstable = true;
                break;
            }
            crossings.push_back({*bound, overlapLatency});
        }
    }

    if (!unstable) {
        double residualRate = std::numeric_limits<double>::infinity();
        double latencySum = 0.0;
        for (int pos = from; pos <= to; ++pos) {
            const RateLatency& srv = net_.servers[foi.path[pos]].service;
            residualRate = std::min(residualRate, srv.rate - rateAt[pos - from]);
            latencySum += srv.latency;
        }
        if (residualRate <= 0.0) {
            unstable = true;
        } else {
            double burstTerm = 0.0;
            for (const Cross& c : crossings) {
                burstTerm += c.bound.burst + c.bound.rate * c.overlapLatency;
            }
            entry.value = RateLatency{residualRate, latencySum + burstTerm / residualRate};
        }
    }
    if (unstable) entry.value.reset();
    return entry.value;
}

Delay TandemAnalysis::delayBound(const Flow& foi, const Decomposition& d) {
    const int k = static_cast<int>(foi.path.size());
    for (std::size_t i = 0; i < d.cuts.size(); ++i) {
        if (d.cuts[i] < 1 || d.cuts[i] >= k || (i > 0 && d.cuts[i] <= d.cuts[i - 1]))
            throw std::invalid_argument("invalid decomposition for flow");
    }

    RateLatency residual{std::numeric_limits<double>::infinity(), 0.0};
    int from = 0;
    for (std::size_t i = 0; i <= d.cuts.size(); ++i) {
        const int to = i < d.cuts.size() ? d.cuts[i] - 1 : k - 1;
        auto segment = subTandemLeftOver(foi, from, to);
        if (!segment) return Delay::unbounded();
        residual = convolve(residual, *segment);
        from = to + 1;
    }
    return horizontalDeviation(foi.arrival, residual);
}

namespace {

// Exhaustive/heuristic winner ordering: lower bound, then fewer cuts, then
// lower bitmask. Fixed so that dataset labels are reproducible.
bool better(const Delay& d1, std::uint32_t m1, const Delay& d2, std::uint32_t m2) {
    if (d1.value() != d2.value()) return d1 < d2;
    const int c1 = std::popcount(m1), c2 = std::popcount(m2);
    if (c1 != c2) return c1 < c2;
    return m1 < m2;
}

}  // namespace

DelayResult TandemAnalysis::exhaustiveTMA(const Flow& foi) {
    const int k = static_cast<int>(foi.path.size());
    if (k > 21) throw std::length_error("path too long to enumerate decompositions");
    const std::uint32_t total = 1u << (k - 1);
    Delay bestDelay = Delay::unbounded();
    std::uint32_t bestMask = 0;
    bool haveBest = false;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        Delay d = delayBound(foi, Decomposition::fromMask(mask, k));
        if (!haveBest || better(d, mask, bestDelay, bestMask)) {
            bestDelay = d;
            bestMask = mask;
            haveBest = true;
        }
    }
    return {bestDelay, Decomposition::fromMask(bestMask, k), total};
}

DelayResult TandemAnalysis::randomHeuristic(const Flow& foi, std::uint64_t count,
                                            std::uint64_t seed) {
    const int k = static_cast<int>(foi.path.size());
    const int boundaries = k - 1;
    if (boundaries < 64 && count >= (1ull << boundaries)) return exhaustiveTMA(foi);

    Rng rng(seed);
    std::vector<std::uint32_t> masks;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t mask = 0;
        for (int b = 0; b < boundaries; ++b) {
            if (rng.coin()) mask |= 1u << b;
        }
        if (std::find(masks.begin(), masks.end(), mask) == masks.end()) masks.push_back(mask);
    }

    Delay bestDelay = Delay::unbounded();
    std::uint32_t bestMask = masks.front();
    bool haveBest = false;
    for (std::uint32_t mask : masks) {
        Delay d = delayBound(foi, Decomposition::fromMask(mask, k));
        if (!haveBest || better(d, mask, bestDelay, bestMask)) {
            bestDelay = d;
            bestMask = mask;
            haveBest = true;
        }
    }
    return {bestDelay, Decomposition::fromMask(bestMask, k), masks.size()};
}

DelayResult TandemAnalysis::bestOf(const Flow& foi, const std::vector<Decomposition>& candidates) {
    assert(!candidates.empty());
    Delay bestDelay = Delay::unbounded();
    std::uint32_t bestMask = 0;
    bool haveBest = false;
    for (const Decomposition& d : candidates) {
        const std::uint32_t mask = d.toMask();
        Delay delay = delayBound(foi, d);
        if (!haveBest || better(delay, mask, bestDelay, bestMask)) {
            bestDelay = delay;
            bestMask = mask;
            haveBest = true;
        }
    }
    const int k = static_cast<int>(foi.path.size());
    return {bestDelay, Decomposition::fromMask(bestMask, k), candidates.size()};
}

}  // namespace nctma
