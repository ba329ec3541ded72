#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nctma/encoding.hpp"

namespace nctma {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix; vectors are rows x 1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// All weights of the message-passing model. The same struct carries
// gradients and optimizer moments, so every consumer walks visit().
struct ModelParams {
    int hidden = 64;
    int iterations = 15;
    bool attention = true;

    Tensor encoderWeight[4];  // per node type, H x featureWidth
    Tensor encoderBias[4];    // H
    Tensor messageWeight;     // H x H, shared by all node types
    Tensor attentionWeight;   // 2H (receiver half, sender half)
    Tensor attentionBias;     // 1
    Tensor updateWeight;      // H x 2H, input [message ++ hidden]
    Tensor updateBias;        // H
    Tensor resetWeight;       // H x 2H
    Tensor resetBias;         // H
    Tensor candidateWeight;   // H x 2H, input [message ++ reset*hidden]
    Tensor candidateBias;     // H
    Tensor readoutHiddenWeight;  // H x H
    Tensor readoutHiddenBias;    // H
    Tensor readoutOutputWeight;  // 1 x H
    Tensor readoutOutputBias;    // 1

    static ModelParams zeros(int hidden, int iterations, bool attention);

    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
    void visit(const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

// Per-iteration activations of one forward pass; hidden[t] holds every
// node's state after t message-passing rounds, flattened node-major.
struct ForwardState {
    int nodes = 0;
    std::vector<std::vector<double>> hidden;  // T+1 entries of nodes*H
    // stashes for the backward pass, one entry per iteration
    std::vector<std::vector<double>> message;     // aggregated input m_v
    std::vector<std::vector<double>> transformed; // W_m h_u per node
    std::vector<std::vector<double>> update;      // z
    std::vector<std::vector<double>> reset;       // r
    std::vector<std::vector<double>> candidate;   // c
    std::vector<std::vector<double>> attCoeff;    // per directed edge slot
};

struct TrainSample {
    EncodedGraph graph;
    std::map<int, int> labels;  // cut node id -> 0/1
};

struct TrainConfig {
    double learningRate = 1e-3;
    int epochs = 10;
    int batchSize = 10;
    std::uint64_t seed = 0;
    bool attention = true;
    int hidden = 64;
    int iterations = 15;
};

struct TrainResult {
    ModelParams model;
    std::vector<double> epochLoss;  // mean sample loss per epoch
};

// Cut probability per cut node id, strictly inside (0,1).
std::map<int, double> forward(const ModelParams& m, const EncodedGraph& g);

// As forward but stops message passing after t rounds (0 <= t <= m.iterations).
std::map<int, double> forwardWithIterations(const ModelParams& m, const EncodedGraph& g, int t);

// Mean binary cross-entropy over the label keys; probabilities clamped to
// [1e-12, 1-1e-12]. Throws on key mismatch.
double loss(const std::map<int, double>& probs, const std::map<int, int>& labels);

// Exact reverse-mode gradient of loss(forward(m, g), labels) w.r.t. every
// parameter. Returns loss value and fills `grads` (same shapes as m).
double gradients(const ModelParams& m, const TrainSample& sample, ModelParams& grads);

// Fan-in-scaled uniform weights, zero biases, from a seeded stream.
ModelParams initModel(int hidden, int iterations, bool attention, std::uint64_t seed);

// Seeded fan-in-scaled uniform init, seeded shuffling, minibatch Adam.
// Single-threaded with fixed accumulation order: bit-reproducible.
TrainResult trainEpochs(const std::vector<TrainSample>& data, const TrainConfig& cfg);

// JSON checkpoint: {"hidden","iterations","attention","tensors":{name:{"shape","data"}}}.
void saveModel(const ModelParams& m, const std::string& path);
ModelParams loadModel(const std::string& path);

}  // namespace nctma
