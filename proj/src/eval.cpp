#include "nctma/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nctma/rng.hpp"

namespace nctma {

namespace {

constexpr std::uint64_t kRandomHeuristicTag = 0x72616e64;  // separates the baseline stream

std::string fmtDouble(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string fmtDelay(const Delay& d) { return d.isUnbounded() ? "inf" : fmtDouble(d.value()); }

// Runs fn(i) for i in [0, count) across `jobs` async tasks; results must be
// written by index so the merge order never depends on scheduling.
template <typename Fn>
void parallelFor(int count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> workers;
    std::atomic<int> nextIndex{0};
    for (int w = 0; w < jobs; ++w) {
        workers.push_back(std::async(std::launch::async, [&]() {
            for (int i = nextIndex.fetch_add(1); i < count; i = nextIndex.fetch_add(1)) fn(i);
        }));
    }
    for (auto& w : workers) w.get();
}

double meanOf(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double medianOf(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

}  // namespace

double relErr(const Delay& heuristic, const Delay& exhaustive) {
    if (exhaustive.isUnbounded() || exhaustive.value() <= 0.0)
        throw std::invalid_argument("relative error undefined: exhaustive bound unbounded or 0");
    if (heuristic.isUnbounded())
        throw std::invalid_argument("relative error undefined: heuristic bound unbounded");
    return (heuristic.value() - exhaustive.value()) / exhaustive.value();
}

void labelDataset(std::vector<Network>& networks, int jobs) {
    parallelFor(static_cast<int>(networks.size()), jobs, [&networks](int i) {
        Network& net = networks[i];
        std::vector<FlowLabel> labels;
        TandemAnalysis analysis(net);
        for (const Flow& f : net.flows) {
            if (f.path.size() < 2) continue;
            const DelayResult best = analysis.exhaustiveTMA(f);
            if (best.delay.isUnbounded()) continue;  // "skip": no training signal
            labels.push_back({f.id, best.decomposition.cuts, best.delay.value()});
        }
        net.labels = std::move(labels);
    });
}

std::vector<TrainSample> buildTrainSamples(const std::vector<Network>& networks,
                                           int* skippedNetworks) {
    std::vector<TrainSample> samples;
    int skipped = 0;
    for (const Network& net : networks) {
        if (!net.labels) {
            ++skipped;
            continue;
        }
        std::map<int, const FlowLabel*> byFlow;
        for (const FlowLabel& l : *net.labels) byFlow[l.flow] = &l;
        bool complete = true;
        for (const Flow& f : net.flows) {
            if (f.path.size() >= 2 && !byFlow.count(f.id)) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            ++skipped;
            continue;
        }
        TrainSample sample;
        sample.graph = encode(net);
        bool anyCut = false;
        for (const Flow& f : net.flows) {
            const int k = static_cast<int>(f.path.size());
            if (k < 2) continue;
            anyCut = true;
            const FlowLabel* label = byFlow.at(f.id);
            for (int b = 1; b < k; ++b) {
                const bool cut =
                    std::find(label->cuts.begin(), label->cuts.end(), b) != label->cuts.end();
                sample.labels[sample.graph.cutIndex.at({f.id, b})] = cut ? 1 : 0;
            }
        }
        if (!anyCut) {
            ++skipped;  // nothing to learn from
            continue;
        }
        samples.push_back(std::move(sample));
    }
    if (skippedNetworks) *skippedNetworks = skipped;
    return samples;
}

EvalOutput evaluateDataset(const ModelParams& model, const std::vector<Network>& networks,
                           const EvalOptions& options) {
    struct PerNetwork {
        std::vector<EvalRecord> records;
        std::vector<std::pair<int, int>> excluded;  // (pathLen, 0=unbounded 1=tooLong)
    };
    std::vector<PerNetwork> partial(networks.size());

    parallelFor(static_cast<int>(networks.size()), options.jobs, [&](int i) {
        const Network& net = networks[i];
        PerNetwork& out = partial[i];
        TandemAnalysis analysis(net);
        const auto probs = cutProbabilities(model, net);
        for (const Flow& f : net.flows) {
            const int k = static_cast<int>(f.path.size());
            if (k - 1 > options.maxBoundaries) {
                out.excluded.push_back({k, 1});
                continue;
            }
            const DelayResult exhaustive = analysis.exhaustiveTMA(f);
            if (exhaustive.delay.isUnbounded()) {
                out.excluded.push_back({k, 0});
                continue;
            }
            for (std::uint64_t n : options.nValues) {
                using Clock = std::chrono::steady_clock;
                EvalRecord rec;
                rec.networkId = net.id;
                rec.flowId = f.id;
                rec.pathLen = k;
                rec.n = n;
                rec.delayExhaustive = exhaustive.delay;

                auto t0 = Clock::now();
                const DelayResult deep = deepTmaDelay(analysis, probs[f.id], f, n, options.seed);
                auto t1 = Clock::now();
                rec.heuristic = "deeptma";
                rec.delayHeuristic = deep.delay;
                rec.relErr = relErr(deep.delay, exhaustive.delay);
                rec.wallTimeS =
                    options.timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
                out.records.push_back(rec);

                t0 = Clock::now();
                const DelayResult rnd = analysis.randomHeuristic(
                    f, n,
                    deriveStream(deriveStream(options.seed, kRandomHeuristicTag), net.id, f.id));
                t1 = Clock::now();
                rec.heuristic = "random";
                rec.delayHeuristic = rnd.delay;
                rec.relErr = relErr(rnd.delay, exhaustive.delay);
                rec.wallTimeS =
                    options.timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
                out.records.push_back(rec);
            }
        }
    });

    EvalOutput output;
    std::map<int, std::pair<int, int>> excludedByLen;  // pathLen -> (unbounded, tooLong)
    for (const PerNetwork& p : partial) {
        output.records.insert(output.records.end(), p.records.begin(), p.records.end());
        for (const auto& [len, kind] : p.excluded) {
            if (kind == 0) {
                excludedByLen[len].first++;
                output.excludedUnbounded++;
            } else {
                excludedByLen[len].second++;
                output.excludedTooLong++;
            }
        }
    }

    // heuristic -> n -> pathLen -> errors, in record order
    std::map<std::string, std::map<std::uint64_t, std::map<int, std::vector<double>>>> groups;
    for (const EvalRecord& r : output.records) groups[r.heuristic][r.n][r.pathLen].push_back(r.relErr);
    for (const auto& [heuristic, byN] : groups) {
        for (const auto& [n, byLen] : byN) {
            for (const auto& [len, errs] : byLen) {
                EvalAggregate agg;
                agg.heuristic = heuristic;
                agg.n = n;
                agg.pathLen = len;
                agg.count = static_cast<int>(errs.size());
                auto ex = excludedByLen.find(len);
                if (ex != excludedByLen.end()) {
                    agg.excludedUnbounded = ex->second.first;
                    agg.excludedTooLong = ex->second.second;
                }
                agg.meanRelErr = meanOf(errs);
                agg.medianRelErr = medianOf(errs);
                output.aggregates.push_back(agg);
            }
        }
    }
    return output;
}

void writeEvalCsv(const EvalOutput& out, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "network_id,flow_id,path_len,heuristic,n,delay_exhaustive,delay_heuristic,rel_err,"
         "wall_time_s\n";
    for (const EvalRecord& r : out.records) {
        f << r.networkId << ',' << r.flowId << ',' << r.pathLen << ',' << r.heuristic << ','
          << r.n << ',' << fmtDelay(r.delayExhaustive) << ',' << fmtDelay(r.delayHeuristic)
          << ',' << fmtDouble(r.relErr) << ',' << fmtDouble(r.wallTimeS) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

void writeAggregateCsv(const EvalOutput& out, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "heuristic,n,path_len,count,excluded_unbounded,excluded_too_long,mean_rel_err,"
         "median_rel_err\n";
    for (const EvalAggregate& a : out.aggregates) {
        f << a.heuristic << ',' << a.n << ',' << a.pathLen << ',' << a.count << ','
          << a.excludedUnbounded << ',' << a.excludedTooLong << ',' << fmtDouble(a.meanRelErr)
          << ',' << fmtDouble(a.medianRelErr) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<EvalAggregate> recomputeAggregatesFromCsv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    std::getline(f, line);  // header
    std::map<std::string, std::map<std::uint64_t, std::map<int, std::vector<double>>>> groups;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 9) throw std::runtime_error("bad record line: " + line);
        const int pathLen = std::stoi(fields[2]);
        const std::uint64_t n = std::stoull(fields[4]);
        groups[fields[3]][n][pathLen].push_back(std::stod(fields[7]));
    }
    std::vector<EvalAggregate> aggregates;
    for (const auto& [heuristic, byN] : groups) {
        for (const auto& [n, byLen] : byN) {
            for (const auto& [len, errs] : byLen) {
                EvalAggregate agg;
                agg.heuristic = heuristic;
                agg.n = n;
                agg.pathLen = len;
                agg.count = static_cast<int>(errs.size());
                agg.meanRelErr = meanOf(errs);
                agg.medianRelErr = medianOf(errs);
                aggregates.push_back(agg);
            }
        }
    }
    return aggregates;
}

namespace {

// Mean RelErr of the thresholded prediction over all finite-exhaustive
// flows, given per-flow cut probabilities.
double thresholdMeanRelErr(const std::vector<Network>& networks,
                           const std::vector<std::vector<std::vector<double>>>& probsPerNet,
                           int maxBoundaries) {
    std::vector<double> errs;
    for (std::size_t i = 0; i < networks.size(); ++i) {
        const Network& net = networks[i];
        TandemAnalysis analysis(net);
        for (const Flow& f : net.flows) {
            const int k = static_cast<int>(f.path.size());
            if (k - 1 > maxBoundaries) continue;
            const DelayResult exhaustive = analysis.exhaustiveTMA(f);
            if (exhaustive.delay.isUnbounded()) continue;
            const Decomposition d = thresholdDecomposition(probsPerNet[i][f.id]);
            errs.push_back(relErr(analysis.delayBound(f, d), exhaustive.delay));
        }
    }
    return meanOf(errs);
}

int featureColumn(const std::string& feature, NodeType& type) {
    if (feature == "serverRate") { type = NodeType::Server; return 4; }
    if (feature == "serverLatency") { type = NodeType::Server; return 5; }
    if (feature == "flowRate") { type = NodeType::Flow; return 4; }
    if (feature == "flowBurst") { type = NodeType::Flow; return 5; }
    if (feature == "pathOrder") { type = NodeType::PathOrder; return 4; }
    throw std::invalid_argument("unknown feature: " + feature);
}

}  // namespace

ImportanceRecord permutationImportance(const ModelParams& model,
                                       const std::vector<Network>& networks,
                                       const std::string& feature, int permutations,
                                       std::uint64_t seed, int maxBoundaries) {
    NodeType type;
    const int column = featureColumn(feature, type);

    std::vector<std::vector<std::vector<double>>> baseProbs(networks.size());
    std::vector<EncodedGraph> graphs(networks.size());
    for (std::size_t i = 0; i < networks.size(); ++i) {
        graphs[i] = encode(networks[i]);
        baseProbs[i] =
            cutProbabilitiesFromGraph(model, graphs[i], networks[i], model.iterations);
    }
    const double baseline = thresholdMeanRelErr(networks, baseProbs, maxBoundaries);

    double deltaSum = 0.0;
    double permutedSum = 0.0;
    for (int draw = 0; draw < permutations; ++draw) {
        std::vector<std::vector<std::vector<double>>> probs(networks.size());
        for (std::size_t i = 0; i < networks.size(); ++i) {
            EncodedGraph g = graphs[i];
            std::vector<int> nodes;
            for (int v = 0; v < g.nodeCount(); ++v)
                if (g.nodeTypes[v] == type) nodes.push_back(v);
            std::vector<double> values;
            values.reserve(nodes.size());
            for (int v : nodes) values.push_back(g.features[v][column]);
            Rng rng(deriveStream(deriveStream(seed, draw), networks[i].id));
            rng.shuffle(values);
            for (std::size_t vi = 0; vi < nodes.size(); ++vi)
                g.features[nodes[vi]][column] = values[vi];
            probs[i] = cutProbabilitiesFromGraph(model, g, networks[i], model.iterations);
        }
        const double permuted = thresholdMeanRelErr(networks, probs, maxBoundaries);
        permutedSum += permuted;
        deltaSum += permuted - baseline;
    }

    ImportanceRecord rec;
    rec.feature = feature;
    rec.importance = permutations > 0 ? deltaSum / permutations : 0.0;
    rec.baselineRelErr = baseline;
    rec.permutedRelErr = permutations > 0 ? permutedSum / permutations : baseline;
    return rec;
}

std::vector<ImportanceRecord> iterationSweep(const ModelParams& model,
                                             const std::vector<Network>& networks,
                                             int maxBoundaries) {
    std::vector<EncodedGraph> graphs(networks.size());
    for (std::size_t i = 0; i < networks.size(); ++i) graphs[i] = encode(networks[i]);

    std::vector<double> meanByT(model.iterations + 1);
    for (int t = 0; t <= model.iterations; ++t) {
        std::vector<std::vector<std::vector<double>>> probs(networks.size());
        for (std::size_t i = 0; i < networks.size(); ++i)
            probs[i] = cutProbabilitiesFromGraph(model, graphs[i], networks[i], t);
        meanByT[t] = thresholdMeanRelErr(networks, probs, maxBoundaries);
    }

    std::vector<ImportanceRecord> records;
    for (int t = 0; t <= model.iterations; ++t) {
        ImportanceRecord rec;
        rec.feature = "t=" + std::to_string(t);
        rec.baselineRelErr = meanByT[model.iterations];
        rec.permutedRelErr = meanByT[t];
        rec.importance = meanByT[t] - meanByT[model.iterations];
        records.push_back(rec);
    }
    return records;
}

std::vector<Network> generateNetworks(const GenerateOptions& options) {
    std::vector<Network> nets(options.count);
    for (int id = 0; id < options.count; ++id) {
        GeneratorParams p;
        p.seed = deriveStream(options.seed, id);
        Rng rng(deriveStream(p.seed, 0x636e7466));  // network-shape draws
        if (options.topology == "mixed") {
            p.topology = static_cast<Topology>(id % 3);
        } else if (options.topology == "tandem") {
            p.topology = Topology::Tandem;
        } else if (options.topology == "tree") {
            p.topology = Topology::Tree;
        } else if (options.topology == "erdos-renyi") {
            p.topology = Topology::ErdosRenyi;
        } else {
            throw std::invalid_argument("unknown topology: " + options.topology);
        }
        p.serverCount = static_cast<int>(rng.uniformInt(options.minServers, options.maxServers));
        p.flowCount = static_cast<int>(rng.uniformInt(options.minFlows, options.maxFlows));
        p.edgeProbability = options.edgeProbability;
        p.utilizationCap = options.utilizationCap;
        // Sparse Erdos-Renyi draws can be flow-unplaceable (e.g. an edgeless
        // graph); retry the network with a re-derived seed, still a pure
        // function of (master seed, id).
        for (int retry = 0;; ++retry) {
            try {
                nets[id] = generate(p);
                break;
            } catch (const GenerationFailed&) {
                if (retry >= 64) throw;
                p.seed = deriveStream(p.seed, 0x72657472794eULL + retry);
            }
        }
        nets[id].id = id;
    }
    return nets;
}

void runGenerate(const GenerateOptions& options, const std::string& outPath) {
    saveDataset(generateNetworks(options), outPath);
}

void runLabel(const std::string& inPath, const std::string& outPath, int jobs) {
    std::vector<Network> nets = loadDataset(inPath);
    labelDataset(nets, jobs);
    saveDataset(nets, outPath);
}

TrainResult runTrain(const std::string& dataPath, const TrainConfig& cfg,
                     const std::string& checkpointPath) {
    std::vector<Network> nets = loadDataset(dataPath);
    std::vector<TrainSample> samples = buildTrainSamples(nets);
    TrainResult result = trainEpochs(samples, cfg);
    saveModel(result.model, checkpointPath);
    return result;
}

EvalOutput runEvaluate(const std::string& dataPath, const std::string& modelPath,
                       const EvalOptions& options, const std::string& csvPath,
                       const std::string& aggPath) {
    const std::vector<Network> nets = loadDataset(dataPath);
    const ModelParams model = loadModel(modelPath);
    EvalOutput out = evaluateDataset(model, nets, options);
    if (!csvPath.empty()) writeEvalCsv(out, csvPath);
    if (!aggPath.empty()) writeAggregateCsv(out, aggPath);
    return out;
}

}  // namespace nctma
