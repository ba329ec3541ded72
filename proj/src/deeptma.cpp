#include "nctma/deeptma.hpp"

#include <algorithm>
#include <stdexcept>

#include "nctma/rng.hpp"

namespace nctma {

std::vector<std::vector<double>> cutProbabilitiesFromGraph(const ModelParams& model,
                                                           const EncodedGraph& graph,
                                                           const Network& net, int iterations) {
    const std::map<int, double> byNode = forwardWithIterations(model, graph, iterations);
    std::vector<std::vector<double>> probs(net.flows.size());
    for (const Flow& f : net.flows) {
        const int k = static_cast<int>(f.path.size());
        probs[f.id].resize(std::max(0, k - 1));
        for (int b = 1; b < k; ++b) {
            probs[f.id][b - 1] = byNode.at(graph.cutIndex.at({f.id, b}));
        }
    }
    return probs;
}

std::vector<std::vector<double>> cutProbabilities(const ModelParams& model, const Network& net) {
    return cutProbabilitiesFromGraph(model, encode(net), net, model.iterations);
}

Decomposition thresholdDecomposition(const std::vector<double>& probs) {
    Decomposition d;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        if (probs[b] > 0.5) d.cuts.push_back(static_cast<int>(b) + 1);
    }
    return d;
}

PredictionSet sampleDecompositions(const std::vector<double>& probs, int foi, std::uint64_t n,
                                   std::uint64_t seed) {
    const int boundaries = static_cast<int>(probs.size());
    if (boundaries > 31)
        throw std::length_error("path too long for decomposition masks (cap callers at 16)");
    const int k = boundaries + 1;
    PredictionSet set;
    set.foi = foi;
    set.nRequested = n;

    const Decomposition threshold = thresholdDecomposition(probs);
    std::vector<std::uint32_t> masks{threshold.toMask()};

    const std::uint64_t total = boundaries < 64 ? (1ull << boundaries) : ~0ull;
    const std::uint64_t want = std::min(n, total);

    // One stream drives every n, so smaller requests are prefixes of larger
    // ones; the cap only ever truncates the tail.
    Rng rng(seed);
    const std::uint64_t maxDraws = 10 * n;
    for (std::uint64_t draw = 0; draw < maxDraws && masks.size() < want; ++draw) {
        std::uint32_t mask = 0;
        for (int b = 0; b < boundaries; ++b) {
            if (rng.uniform01() <= probs[b]) mask |= 1u << b;
        }
        if (std::find(masks.begin(), masks.end(), mask) == masks.end()) masks.push_back(mask);
    }
    if (n >= total) {
        // Whole space requested: complete with the never-sampled ones.
        for (std::uint32_t mask = 0; mask < total && masks.size() < total; ++mask) {
            if (std::find(masks.begin(), masks.end(), mask) == masks.end())
                masks.push_back(mask);
        }
    }

    set.decompositions.reserve(masks.size());
    for (std::uint32_t mask : masks)
        set.decompositions.push_back(Decomposition::fromMask(mask, k));
    return set;
}

Decomposition predictDecomposition(const ModelParams& model, const Network& net,
                                   const Flow& foi) {
    return thresholdDecomposition(cutProbabilities(model, net)[foi.id]);
}

PredictionSet sampleDecompositions(const ModelParams& model, const Network& net,
                                   const Flow& foi, std::uint64_t n, std::uint64_t seed) {
    return sampleDecompositions(cutProbabilities(model, net)[foi.id], foi.id, n,
                                deriveStream(seed, net.id, foi.id));
}

DelayResult deepTmaDelay(TandemAnalysis& analysis, const std::vector<double>& probs,
                         const Flow& foi, std::uint64_t n, std::uint64_t seed) {
    const PredictionSet set =
        sampleDecompositions(probs, foi.id, n, deriveStream(seed, analysis.network().id, foi.id));
    return analysis.bestOf(foi, set.decompositions);
}

DelayResult deepTmaDelay(const ModelParams& model, const Network& net, const Flow& foi,
                         std::uint64_t n, std::uint64_t seed) {
    TandemAnalysis analysis(net);
    return deepTmaDelay(analysis, cutProbabilities(model, net)[foi.id], foi, n, seed);
}

}  // namespace nctma
