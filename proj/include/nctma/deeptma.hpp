#pragma once

#include <cstdint>
#include <vector>

#include "nctma/gnn.hpp"
#include "nctma/tma.hpp"

namespace nctma {

struct PredictionSet {
    int foi = 0;
    std::vector<Decomposition> decompositions;  // first = thresholded prediction
    std::uint64_t nRequested = 0;
};

// Cut probabilities of every flow in a network from one forward pass,
// indexed [flow id][boundary - 1]. Encoding and inference happen once per
// network; the per-flow heuristics below all start from this.
std::vector<std::vector<double>> cutProbabilities(const ModelParams& model, const Network& net);

// Probabilities variant used by the iteration sweep and feature permutation:
// same, but on an already-encoded (possibly modified) graph.
std::vector<std::vector<double>> cutProbabilitiesFromGraph(const ModelParams& model,
                                                           const EncodedGraph& graph,
                                                           const Network& net, int iterations);

// Cut at every boundary whose probability strictly exceeds 1/2.
Decomposition thresholdDecomposition(const std::vector<double>& probs);

// Candidate list per the sampling scheme: the thresholded decomposition
// first, then distinct boundary-wise Bernoulli samples from one seeded
// stream. Once the whole space is requested the list completes to all
// decompositions, so for a fixed seed the list for n is always a prefix of
// the list for any larger n. A retry budget of 10n draws bounds sampling
// for near-deterministic probability vectors.
PredictionSet sampleDecompositions(const std::vector<double>& probs, int foi, std::uint64_t n,
                                   std::uint64_t seed);

// Convenience wrappers running the model on the network.
Decomposition predictDecomposition(const ModelParams& model, const Network& net,
                                   const Flow& foi);
PredictionSet sampleDecompositions(const ModelParams& model, const Network& net,
                                   const Flow& foi, std::uint64_t n, std::uint64_t seed);

// Best bound over the prediction set; the bound itself comes from the
// formal analysis, so it is valid regardless of prediction quality.
DelayResult deepTmaDelay(const ModelParams& model, const Network& net, const Flow& foi,
                         std::uint64_t n, std::uint64_t seed);

// Same but reusing a per-network analysis and precomputed probabilities.
DelayResult deepTmaDelay(TandemAnalysis& analysis, const std::vector<double>& probs,
                         const Flow& foi, std::uint64_t n, std::uint64_t seed);

}  // namespace nctma
