// Command-line driver: dataset generation and labeling, model training,
// per-flow analysis, evaluation sweeps and feature importance. Exit codes:
// 0 success, 1 usage error, 2 data/schema error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nctma/eval.hpp"
#include "nctma/rng.hpp"

namespace {

std::vector<std::uint64_t> parseNValues(const std::string& csv) {
    std::vector<std::uint64_t> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stoull(item));
    }
    if (values.empty()) throw CLI::ValidationError("--n", "needs at least one value");
    return values;
}

std::string describeDecomposition(const nctma::Decomposition& d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.cuts.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(d.cuts[i]);
    }
    return s + "]";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network-calculus delay bounds with learned tandem decompositions"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a random network dataset (JSONL)");
    nctma::GenerateOptions genOpts;
    std::string genOut;
    gen->add_option("--count", genOpts.count, "Number of networks")->capture_default_str();
    gen->add_option("--topology", genOpts.topology, "tandem|tree|erdos-renyi|mixed")
        ->capture_default_str();
    gen->add_option("--min-servers", genOpts.minServers)->capture_default_str();
    gen->add_option("--max-servers", genOpts.maxServers)->capture_default_str();
    gen->add_option("--min-flows", genOpts.minFlows)->capture_default_str();
    gen->add_option("--max-flows", genOpts.maxFlows)->capture_default_str();
    gen->add_option("--edge-prob", genOpts.edgeProbability, "Erdos-Renyi edge probability")
        ->capture_default_str();
    gen->add_option("--util-cap", genOpts.utilizationCap, "Per-server utilization cap")
        ->capture_default_str();
    gen->add_option("--seed", genOpts.seed)->capture_default_str();
    gen->add_option("--out", genOut, "Output JSONL path")->required();

    // label
    auto* label = app.add_subcommand("label", "Attach exhaustive best decompositions");
    std::string labelIn, labelOut;
    int labelJobs = 1;
    label->add_option("--in", labelIn)->required();
    label->add_option("--out", labelOut)->required();
    label->add_option("--jobs", labelJobs)->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Train the cut-prediction model");
    std::string trainData, trainOut, attention = "on";
    nctma::TrainConfig cfg;
    train->add_option("--data", trainData, "Labeled JSONL dataset")->required();
    train->add_option("--epochs", cfg.epochs)->capture_default_str();
    train->add_option("--hidden", cfg.hidden)->capture_default_str();
    train->add_option("--iterations", cfg.iterations)->capture_default_str();
    train->add_option("--lr", cfg.learningRate)->capture_default_str();
    train->add_option("--batch", cfg.batchSize)->capture_default_str();
    train->add_option("--seed", cfg.seed)->capture_default_str();
    train->add_option("--attention", attention, "on|off")->capture_default_str();
    train->add_option("--out", trainOut, "Checkpoint path")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Bound one flow of one network");
    std::string anData, anMode = "exhaustive", anModel;
    int anNetwork = 0, anFlow = 0;
    std::uint64_t anN = 1, anSeed = 0;
    analyze->add_option("--network", anData, "Dataset JSONL path")->required();
    analyze->add_option("--id", anNetwork, "Network id within the file")->capture_default_str();
    analyze->add_option("--flow", anFlow, "Flow id")->required();
    analyze->add_option("--mode", anMode, "exhaustive|deeptma|random")->capture_default_str();
    analyze->add_option("--model", anModel, "Checkpoint (deeptma mode)");
    analyze->add_option("--n", anN)->capture_default_str();
    analyze->add_option("--seed", anSeed)->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "RelErr of DeepTMA_n and random_n");
    std::string evData, evModel, evCsv, evAgg, evN = "1,2,4,8";
    nctma::EvalOptions evOpts;
    evaluate->add_option("--data", evData)->required();
    evaluate->add_option("--model", evModel)->required();
    evaluate->add_option("--n", evN, "Comma-separated n values")->capture_default_str();
    evaluate->add_option("--seed", evOpts.seed)->capture_default_str();
    evaluate->add_option("--csv", evCsv, "Raw record CSV path")->required();
    evaluate->add_option("--agg", evAgg, "Aggregate CSV path (default <csv>.agg)");
    evaluate->add_option("--max-boundaries", evOpts.maxBoundaries)->capture_default_str();
    evaluate->add_option("--jobs", evOpts.jobs)->capture_default_str();
    evaluate->add_flag("--timing", evOpts.timing,
                       "Record real wall times (breaks byte-identical reruns)");

    // importance
    auto* importance = app.add_subcommand("importance", "Permutation feature importance");
    std::string impData, impModel, impFeature;
    int impPerms = 10;
    std::uint64_t impSeed = 0;
    importance->add_option("--data", impData)->required();
    importance->add_option("--model", impModel)->required();
    importance->add_option("--feature", impFeature,
                           "serverRate|serverLatency|flowRate|flowBurst|pathOrder|all")
        ->required();
    importance->add_option("--permutations", impPerms)->capture_default_str();
    importance->add_option("--seed", impSeed)->capture_default_str();

    // sweep-iterations
    auto* sweep = app.add_subcommand("sweep-iterations", "RelErr vs message-passing rounds");
    std::string swData, swModel;
    std::uint64_t swSeed = 0;
    sweep->add_option("--data", swData)->required();
    sweep->add_option("--model", swModel)->required();
    sweep->add_option("--seed", swSeed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            nctma::runGenerate(genOpts, genOut);
            std::cout << "wrote " << genOpts.count << " networks to " << genOut << "\n";
        } else if (label->parsed()) {
            nctma::runLabel(labelIn, labelOut, labelJobs);
            std::cout << "labeled dataset written to " << labelOut << "\n";
        } else if (train->parsed()) {
            cfg.attention = attention != "off";
            nctma::TrainResult result = nctma::runTrain(trainData, cfg, trainOut);
            for (std::size_t e = 0; e < result.epochLoss.size(); ++e)
                std::cout << "epoch " << e << " mean loss " << result.epochLoss[e] << "\n";
            std::cout << "checkpoint written to " << trainOut << "\n";
        } else if (analyze->parsed()) {
            const auto nets = nctma::loadDataset(anData);
            const nctma::Network* net = nullptr;
            for (const auto& n : nets)
                if (n.id == anNetwork) net = &n;
            if (!net) throw nctma::DatasetError("no network with id " + std::to_string(anNetwork));
            if (anFlow < 0 || anFlow >= static_cast<int>(net->flows.size()))
                throw nctma::DatasetError("no flow with id " + std::to_string(anFlow));
            const nctma::Flow& foi = net->flows[anFlow];
            nctma::TandemAnalysis analysis(*net);
            nctma::DelayResult result;
            if (anMode == "exhaustive") {
                result = analysis.exhaustiveTMA(foi);
            } else if (anMode == "deeptma") {
                if (anModel.empty()) throw CLI::ValidationError("--model", "required for deeptma");
                const auto model = nctma::loadModel(anModel);
                result = nctma::deepTmaDelay(model, *net, foi, anN, anSeed);
            } else if (anMode == "random") {
                result = analysis.randomHeuristic(
                    foi, anN, nctma::deriveStream(anSeed, net->id, foi.id));
            } else {
                throw CLI::ValidationError("--mode", "must be exhaustive|deeptma|random");
            }
            std::cout << "network " << net->id << " flow " << foi.id << " mode " << anMode
                      << "\n";
            std::cout << "delay "
                      << (result.delay.isUnbounded() ? std::string("inf")
                                                     : std::to_string(result.delay.value()))
                      << " decomposition " << describeDecomposition(result.decomposition)
                      << " evaluated " << result.evaluatedCount << "\n";
        } else if (evaluate->parsed()) {
            evOpts.nValues = parseNValues(evN);
            if (evAgg.empty()) evAgg = evCsv + ".agg";
            const nctma::EvalOutput out =
                nctma::runEvaluate(evData, evModel, evOpts, evCsv, evAgg);
            std::cout << "wrote " << out.records.size() << " records to " << evCsv << " ("
                      << out.excludedUnbounded << " unbounded, " << out.excludedTooLong
                      << " over boundary cap)\n";
        } else if (importance->parsed()) {
            const auto nets = nctma::loadDataset(impData);
            const auto model = nctma::loadModel(impModel);
            std::vector<std::string> features;
            if (impFeature == "all")
                features = nctma::featureNames();
            else
                features.push_back(impFeature);
            std::cout << "feature,permutations,baseline_rel_err,permuted_rel_err,importance\n";
            for (const std::string& feature : features) {
                const auto rec =
                    nctma::permutationImportance(model, nets, feature, impPerms, impSeed);
                std::cout << rec.feature << ',' << impPerms << ',' << rec.baselineRelErr << ','
                          << rec.permutedRelErr << ',' << rec.importance << "\n";
            }
        } else if (sweep->parsed()) {
            const auto nets = nctma::loadDataset(swData);
            const auto model = nctma::loadModel(swModel);
            std::cout << "iterations,mean_rel_err,delta_vs_full\n";
            for (const auto& rec : nctma::iterationSweep(model, nets)) {
                std::cout << rec.feature.substr(2) << ',' << rec.permutedRelErr << ','
                          << rec.importance << "\n";
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
