#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nctma/dataset.hpp"
#include "nctma/deeptma.hpp"
#include "nctma/generators.hpp"

namespace nctma {

// Relative error of a heuristic bound against the exhaustive one (both
// finite, exhaustive > 0).
double relErr(const Delay& heuristic, const Delay& exhaustive);

// Attaches exhaustive-search labels to every flow with k >= 2 and a finite
// best delay. Labeling distinct networks is independent; jobs > 1 keeps the
// output order (and bytes) identical to a serial run.
void labelDataset(std::vector<Network>& networks, int jobs = 1);

// Labeled networks -> training samples. Networks where some k >= 2 flow has
// no label (unbounded best delay) are skipped and counted: every cut node
// of an emitted sample carries a label.
std::vector<TrainSample> buildTrainSamples(const std::vector<Network>& networks,
                                           int* skippedNetworks = nullptr);

struct EvalRecord {
    int networkId = 0;
    int flowId = 0;
    int pathLen = 0;
    std::string heuristic;  // "deeptma" | "random"
    std::uint64_t n = 0;
    Delay delayExhaustive;
    Delay delayHeuristic;
    double relErr = 0.0;
    double wallTimeS = 0.0;
};

struct EvalAggregate {
    std::string heuristic;
    std::uint64_t n = 0;
    int pathLen = 0;
    int count = 0;
    int excludedUnbounded = 0;  // flows of this path length, see EvalOutput
    int excludedTooLong = 0;
    double meanRelErr = 0.0;
    double medianRelErr = 0.0;
};

struct EvalOptions {
    std::vector<std::uint64_t> nValues{1, 2, 4, 8};
    std::uint64_t seed = 0;
    // Flows with more boundaries are excluded from evaluation (their
    // exhaustive search would not terminate in reasonable time) and counted.
    int maxBoundaries = 16;
    bool timing = false;  // real wall times are not byte-reproducible
    int jobs = 1;
};

struct EvalOutput {
    std::vector<EvalRecord> records;
    std::vector<EvalAggregate> aggregates;
    int excludedUnbounded = 0;
    int excludedTooLong = 0;
};

// Per flow: exhaustive baseline, DeepTMA_n and random_n for each requested
// n. Aggregates are exact functions of the records (mean/median by
// (heuristic, n, path length)).
EvalOutput evaluateDataset(const ModelParams& model, const std::vector<Network>& networks,
                           const EvalOptions& options);

// Raw record CSV with header
// network_id,flow_id,path_len,heuristic,n,delay_exhaustive,delay_heuristic,rel_err,wall_time_s
// Floats are shortest round-trip decimals, so an independent reader can
// recompute the aggregate file exactly.
void writeEvalCsv(const EvalOutput& out, const std::string& path);
void writeAggregateCsv(const EvalOutput& out, const std::string& path);
std::vector<EvalAggregate> recomputeAggregatesFromCsv(const std::string& path);

struct ImportanceRecord {
    std::string feature;  // feature name, or "t=<k>" for the iteration sweep
    double importance = 0.0;  // mean RelErr delta vs baseline
    double baselineRelErr = 0.0;
    double permutedRelErr = 0.0;
};

inline const std::vector<std::string>& featureNames() {
    static const std::vector<std::string> names{"serverRate", "serverLatency", "flowRate",
                                                "flowBurst", "pathOrder"};
    return names;
}

// Permutation importance of one input feature: shuffle its values across
// nodes of the same type within each graph, re-run the thresholded
// prediction, and average the RelErr excess over the unpermuted baseline
// across `permutations` draws.
ImportanceRecord permutationImportance(const ModelParams& model,
                                       const std::vector<Network>& networks,
                                       const std::string& feature, int permutations,
                                       std::uint64_t seed, int maxBoundaries = 16);

// Mean RelErr of the thresholded prediction when message passing stops after
// t rounds, for every t in 0..T, with the delta against the full-T baseline.
std::vector<ImportanceRecord> iterationSweep(const ModelParams& model,
                                             const std::vector<Network>& networks,
                                             int maxBoundaries = 16);

// ---- file-level pipeline (the CLI subcommand bodies) ----

struct GenerateOptions {
    int count = 100;
    std::string topology = "mixed";  // tandem | tree | erdos-renyi | mixed
    int minServers = 2;
    int maxServers = 8;
    int minFlows = 3;
    int maxFlows = 30;
    double edgeProbability = 0.3;
    double utilizationCap = 0.9;
    std::uint64_t seed = 0;
};

std::vector<Network> generateNetworks(const GenerateOptions& options);
void runGenerate(const GenerateOptions& options, const std::string& outPath);
void runLabel(const std::string& inPath, const std::string& outPath, int jobs);
TrainResult runTrain(const std::string& dataPath, const TrainConfig& cfg,
                     const std::string& checkpointPath);
EvalOutput runEvaluate(const std::string& dataPath, const std::string& modelPath,
                       const EvalOptions& options, const std::string& csvPath,
                       const std::string& aggPath);

}  // namespace nctma
