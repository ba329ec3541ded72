#include "nctma/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "nctma/rng.hpp"

namespace nctma {

namespace {

constexpr double kProbClamp = 1e-12;

const char* kTypeNames[4] = {"server", "flow", "path_order", "cut"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x. Four accumulators fix the reduction order while letting the
// compiler vectorize it.
void matvec(const Tensor& w, const double* x, double* y) {
    for (int r = 0; r < w.rows; ++r) {
        const double* row = w.data.data() + static_cast<std::size_t>(r) * w.cols;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        int c = 0;
        for (; c + 4 <= w.cols; c += 4) {
            a0 += row[c] * x[c];
            a1 += row[c + 1] * x[c + 1];
            a2 += row[c + 2] * x[c + 2];
            a3 += row[c + 3] * x[c + 3];
        }
        double acc = (a0 + a1) + (a2 + a3);
        for (; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

// y += W^T g
void matTvecAdd(const Tensor& w, const double* g, double* y) {
    for (int r = 0; r < w.rows; ++r) {
        const double* row = w.data.data() + static_cast<std::size_t>(r) * w.cols;
        const double gr = g[r];
        for (int c = 0; c < w.cols; ++c) y[c] += row[c] * gr;
    }
}

// dW += g x^T
void outerAdd(Tensor& dw, const double* g, const double* x) {
    for (int r = 0; r < dw.rows; ++r) {
        double* row = dw.data.data() + static_cast<std::size_t>(r) * dw.cols;
        const double gr = g[r];
        for (int c = 0; c < dw.cols; ++c) row[c] += gr * x[c];
    }
}

struct Csr {
    std::vector<int> offsets;
    std::vector<int> nbr;

    explicit Csr(const EncodedGraph& g) {
        const int n = g.nodeCount();
        std::vector<int> degree(n, 0);
        for (const auto& [a, b] : g.edges) {
            degree[a]++;
            degree[b]++;
        }
        offsets.assign(n + 1, 0);
        for (int v = 0; v < n; ++v) offsets[v + 1] = offsets[v] + degree[v];
        nbr.resize(offsets[n]);
        std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
        for (const auto& [a, b] : g.edges) {
            nbr[cursor[a]++] = b;
            nbr[cursor[b]++] = a;
        }
    }

    std::size_t slots() const { return nbr.size(); }
};

// h^0 = per-type affine encoding of the input features.
void encodeInputs(const ModelParams& m, const EncodedGraph& g, std::vector<double>& h0) {
    const int H = m.hidden;
    h0.assign(static_cast<std::size_t>(g.nodeCount()) * H, 0.0);
    for (int v = 0; v < g.nodeCount(); ++v) {
        const int type = static_cast<int>(g.nodeTypes[v]);
        double* out = h0.data() + static_cast<std::size_t>(v) * H;
        matvec(m.encoderWeight[type], g.features[v].data(), out);
        const Tensor& bias = m.encoderBias[type];
        for (int i = 0; i < H; ++i) out[i] += bias.data[i];
    }
}

// One message-passing round: prev -> next. All scratch buffers are caller
// owned; when the caller keeps them per iteration they double as the
// backward-pass stash.
void passIteration(const ModelParams& m, const Csr& csr, int nodes,
                   const std::vector<double>& prev, std::vector<double>& next,
                   std::vector<double>& msgBuf, std::vector<double>& transformed,
                   std::vector<double>& zBuf, std::vector<double>& rBuf,
                   std::vector<double>& cBuf, std::vector<double>& attBuf) {
    const int H = m.hidden;
    transformed.resize(static_cast<std::size_t>(nodes) * H);
    for (int u = 0; u < nodes; ++u)
        matvec(m.messageWeight, prev.data() + static_cast<std::size_t>(u) * H,
               transformed.data() + static_cast<std::size_t>(u) * H);

    std::vector<double> selfScore, nbrScore;
    if (m.attention) {
        selfScore.resize(nodes);
        nbrScore.resize(nodes);
        const double* wRecv = m.attentionWeight.data.data();
        const double* wSend = wRecv + H;
        for (int v = 0; v < nodes; ++v) {
            const double* h = prev.data() + static_cast<std::size_t>(v) * H;
            double sSelf = 0.0, sNbr = 0.0;
            for (int i = 0; i < H; ++i) {
                sSelf += wRecv[i] * h[i];
                sNbr += wSend[i] * h[i];
            }
            selfScore[v] = sSelf;
            nbrScore[v] = sNbr;
        }
        attBuf.assign(csr.slots(), 0.0);
    }

    msgBuf.assign(static_cast<std::size_t>(nodes) * H, 0.0);
    zBuf.resize(static_cast<std::size_t>(nodes) * H);
    rBuf.resize(static_cast<std::size_t>(nodes) * H);
    cBuf.resize(static_cast<std::size_t>(nodes) * H);
    next.resize(static_cast<std::size_t>(nodes) * H);

    std::vector<double> cat(2 * static_cast<std::size_t>(H)), act(H);
    for (int v = 0; v < nodes; ++v) {
        const double* hv = prev.data() + static_cast<std::size_t>(v) * H;
        double* msg = msgBuf.data() + static_cast<std::size_t>(v) * H;
        const int begin = csr.offsets[v], end = csr.offsets[v + 1];

        if (m.attention && end > begin) {
            // Neighborhood softmax; the shared bias cancels but is kept in
            // the scores so the scorer stays a plain affine map.
            const double bias = m.attentionBias.data[0];
            double maxScore = -std::numeric_limits<double>::infinity();
            for (int e = begin; e < end; ++e)
                maxScore = std::max(maxScore, selfScore[v] + nbrScore[csr.nbr[e]] + bias);
            double total = 0.0;
            for (int e = begin; e < end; ++e) {
                const double a =
                    std::exp(selfScore[v] + nbrScore[csr.nbr[e]] + bias - maxScore);
                attBuf[e] = a;
                total += a;
            }
            for (int e = begin; e < end; ++e) {
                attBuf[e] /= total;
                const double* tu = transformed.data() + static_cast<std::size_t>(csr.nbr[e]) * H;
                const double a = attBuf[e];
                for (int i = 0; i < H; ++i) msg[i] += a * tu[i];
            }
        } else {
            for (int e = begin; e < end; ++e) {
                const double* tu = transformed.data() + static_cast<std::size_t>(csr.nbr[e]) * H;
                for (int i = 0; i < H; ++i) msg[i] += tu[i];
            }
        }

        // Gated recurrent update of the hidden state with the message.
        std::copy(msg, msg + H, cat.begin());
        std::copy(hv, hv + H, cat.begin() + H);
        double* z = zBuf.data() + static_cast<std::size_t>(v) * H;
        double* r = rBuf.data() + static_cast<std::size_t>(v) * H;
        double* c = cBuf.data() + static_cast<std::size_t>(v) * H;
        double* hn = next.data() + static_cast<std::size_t>(v) * H;

        matvec(m.updateWeight, cat.data(), act.data());
        for (int i = 0; i < H; ++i) z[i] = sigmoid(act[i] + m.updateBias.data[i]);
        matvec(m.resetWeight, cat.data(), act.data());
        for (int i = 0; i < H; ++i) r[i] = sigmoid(act[i] + m.resetBias.data[i]);
        for (int i = 0; i < H; ++i) cat[H + i] = r[i] * hv[i];
        matvec(m.candidateWeight, cat.data(), act.data());
        for (int i = 0; i < H; ++i) c[i] = std::tanh(act[i] + m.candidateBias.data[i]);
        for (int i = 0; i < H; ++i) hn[i] = (1.0 - z[i]) * hv[i] + z[i] * c[i];
    }
}

double readoutLogit(const ModelParams& m, const double* h, std::vector<double>& a1) {
    const int H = m.hidden;
    a1.resize(H);
    std::vector<double> u1(H);
    matvec(m.readoutHiddenWeight, h, u1.data());
    for (int i = 0; i < H; ++i) a1[i] = std::tanh(u1[i] + m.readoutHiddenBias.data[i]);
    double logit = m.readoutOutputBias.data[0];
    for (int i = 0; i < H; ++i) logit += m.readoutOutputWeight.data[i] * a1[i];
    return logit;
}

ForwardState runForward(const ModelParams& m, const EncodedGraph& g, const Csr& csr,
                        int iterations, bool keepStash) {
    const int nodes = g.nodeCount();
    ForwardState st;
    st.nodes = nodes;
    st.hidden.resize(iterations + 1);
    encodeInputs(m, g, st.hidden[0]);
    if (keepStash) {
        st.message.resize(iterations);
        st.transformed.resize(iterations);
        st.update.resize(iterations);
        st.reset.resize(iterations);
        st.candidate.resize(iterations);
        st.attCoeff.resize(iterations);
    }
    std::vector<double> msg, transformed, z, r, c, att;
    for (int t = 0; t < iterations; ++t) {
        // With the stash on, pass its slots directly so nothing is copied.
        std::vector<double>& msgT = keepStash ? st.message[t] : msg;
        std::vector<double>& trT = keepStash ? st.transformed[t] : transformed;
        std::vector<double>& zT = keepStash ? st.update[t] : z;
        std::vector<double>& rT = keepStash ? st.reset[t] : r;
        std::vector<double>& cT = keepStash ? st.candidate[t] : c;
        std::vector<double>& attT = keepStash ? st.attCoeff[t] : att;
        passIteration(m, csr, nodes, st.hidden[t], st.hidden[t + 1], msgT, trT, zT, rT, cT,
                      attT);
    }
    return st;
}

std::map<int, double> readoutCuts(const ModelParams& m, const EncodedGraph& g,
                                  const std::vector<double>& hFinal) {
    std::map<int, double> probs;
    std::vector<double> a1;
    for (int v = 0; v < g.nodeCount(); ++v) {
        if (g.nodeTypes[v] != NodeType::Cut) continue;
        const double logit =
            readoutLogit(m, hFinal.data() + static_cast<std::size_t>(v) * m.hidden, a1);
        probs[v] = sigmoid(logit);
    }
    return probs;
}

void checkModel(const ModelParams& m) {
    const int H = m.hidden;
    auto expect = [](const Tensor& t, int r, int c, const char* name) {
        if (t.rows != r || t.cols != c)
            throw ShapeError(std::string("tensor shape mismatch: ") + name);
    };
    for (int i = 0; i < 4; ++i) {
        expect(m.encoderWeight[i], H, kFeatureWidth, "encoder weight");
        expect(m.encoderBias[i], H, 1, "encoder bias");
    }
    expect(m.messageWeight, H, H, "message.weight");
    expect(m.attentionWeight, 1, 2 * H, "attention.weight");
    expect(m.attentionBias, 1, 1, "attention.bias");
    expect(m.updateWeight, H, 2 * H, "gru.update.weight");
    expect(m.updateBias, H, 1, "gru.update.bias");
    expect(m.resetWeight, H, 2 * H, "gru.reset.weight");
    expect(m.resetBias, H, 1, "gru.reset.bias");
    expect(m.candidateWeight, H, 2 * H, "gru.candidate.weight");
    expect(m.candidateBias, H, 1, "gru.candidate.bias");
    expect(m.readoutHiddenWeight, H, H, "readout.hidden.weight");
    expect(m.readoutHiddenBias, H, 1, "readout.hidden.bias");
    expect(m.readoutOutputWeight, 1, H, "readout.output.weight");
    expect(m.readoutOutputBias, 1, 1, "readout.output.bias");
}

}  // namespace

ModelParams ModelParams::zeros(int hidden, int iterations, bool attention) {
    ModelParams m;
    m.hidden = hidden;
    m.iterations = iterations;
    m.attention = attention;
    for (int i = 0; i < 4; ++i) {
        m.encoderWeight[i] = Tensor(hidden, kFeatureWidth);
        m.encoderBias[i] = Tensor(hidden, 1);
    }
    m.messageWeight = Tensor(hidden, hidden);
    m.attentionWeight = Tensor(1, 2 * hidden);
    m.attentionBias = Tensor(1, 1);
    m.updateWeight = Tensor(hidden, 2 * hidden);
    m.updateBias = Tensor(hidden, 1);
    m.resetWeight = Tensor(hidden, 2 * hidden);
    m.resetBias = Tensor(hidden, 1);
    m.candidateWeight = Tensor(hidden, 2 * hidden);
    m.candidateBias = Tensor(hidden, 1);
    m.readoutHiddenWeight = Tensor(hidden, hidden);
    m.readoutHiddenBias = Tensor(hidden, 1);
    m.readoutOutputWeight = Tensor(1, hidden);
    m.readoutOutputBias = Tensor(1, 1);
    return m;
}

void ModelParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    for (int i = 0; i < 4; ++i) {
        fn(std::string("encoder.") + kTypeNames[i] + ".weight", encoderWeight[i]);
        fn(std::string("encoder.") + kTypeNames[i] + ".bias", encoderBias[i]);
    }
    fn("message.weight", messageWeight);
    fn("attention.weight", attentionWeight);
    fn("attention.bias", attentionBias);
    fn("gru.update.weight", updateWeight);
    fn("gru.update.bias", updateBias);
    fn("gru.reset.weight", resetWeight);
    fn("gru.reset.bias", resetBias);
    fn("gru.candidate.weight", candidateWeight);
    fn("gru.candidate.bias", candidateBias);
    fn("readout.hidden.weight", readoutHiddenWeight);
    fn("readout.hidden.bias", readoutHiddenBias);
    fn("readout.output.weight", readoutOutputWeight);
    fn("readout.output.bias", readoutOutputBias);
}

void ModelParams::visit(const std::function<void(const std::string&, const Tensor&)>& fn) const {
    const_cast<ModelParams*>(this)->visit(
        [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

std::map<int, double> forward(const ModelParams& m, const EncodedGraph& g) {
    return forwardWithIterations(m, g, m.iterations);
}

std::map<int, double> forwardWithIterations(const ModelParams& m, const EncodedGraph& g,
                                            int t) {
    if (t < 0 || t > m.iterations)
        throw std::out_of_range("iteration count outside [0, T]");
    checkModel(m);
    Csr csr(g);
    ForwardState st = runForward(m, g, csr, t, false);
    return readoutCuts(m, g, st.hidden[t]);
}

double loss(const std::map<int, double>& probs, const std::map<int, int>& labels) {
    if (labels.empty()) throw std::invalid_argument("empty label set");
    double total = 0.0;
    for (const auto& [node, y] : labels) {
        auto it = probs.find(node);
        if (it == probs.end())
            throw std::invalid_argument("label for node without probability: " +
                                        std::to_string(node));
        const double p = std::clamp(it->second, kProbClamp, 1.0 - kProbClamp);
        total += y == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(labels.size());
}

double gradients(const ModelParams& m, const TrainSample& sample, ModelParams& grads) {
    checkModel(m);
    checkModel(grads);
    const EncodedGraph& g = sample.graph;
    const int H = m.hidden;
    const int T = m.iterations;
    const int nodes = g.nodeCount();
    Csr csr(g);
    ForwardState st = runForward(m, g, csr, T, true);

    // Readout + loss, stashing per-cut activations for the backward sweep.
    const double invK = 1.0 / static_cast<double>(sample.labels.size());
    double lossValue = 0.0;
    std::vector<double> dhCur(static_cast<std::size_t>(nodes) * H, 0.0);
    {
        std::vector<double> a1, da1(H), du1(H);
        for (const auto& [node, y] : sample.labels) {
            const double* h = st.hidden[T].data() + static_cast<std::size_t>(node) * H;
            const double logit = readoutLogit(m, h, a1);
            const double p = sigmoid(logit);
            const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
            lossValue += (y == 1 ? -std::log(pc) : -std::log(1.0 - pc)) * invK;
            if (p <= kProbClamp || p >= 1.0 - kProbClamp) continue;  // clamp: flat
            const double dlogit = (p - static_cast<double>(y)) * invK;

            grads.readoutOutputBias.data[0] += dlogit;
            for (int i = 0; i < H; ++i) {
                grads.readoutOutputWeight.data[i] += dlogit * a1[i];
                da1[i] = m.readoutOutputWeight.data[i] * dlogit;
                du1[i] = da1[i] * (1.0 - a1[i] * a1[i]);
            }
            outerAdd(grads.readoutHiddenWeight, du1.data(), h);
            for (int i = 0; i < H; ++i) grads.readoutHiddenBias.data[i] += du1[i];
            matTvecAdd(m.readoutHiddenWeight, du1.data(),
                       dhCur.data() + static_cast<std::size_t>(node) * H);
        }
    }

    // Reverse sweep through the unrolled iterations.
    std::vector<double> dhPrev(static_cast<std::size_t>(nodes) * H);
    std::vector<double> dTransformed(static_cast<std::size_t>(nodes) * H);
    std::vector<double> dm(H), dz(H), dr(H), dc(H), dact(H), cat(2 * static_cast<std::size_t>(H)),
        dcat(2 * static_cast<std::size_t>(H));
    std::vector<double> dNbrScore(nodes), daScratch;
    for (int t = T - 1; t >= 0; --t) {
        const std::vector<double>& prev = st.hidden[t];
        std::fill(dhPrev.begin(), dhPrev.end(), 0.0);
        std::fill(dTransformed.begin(), dTransformed.end(), 0.0);
        if (m.attention) std::fill(dNbrScore.begin(), dNbrScore.end(), 0.0);

        for (int v = 0; v < nodes; ++v) {
            const double* hv = prev.data() + static_cast<std::size_t>(v) * H;
            const double* g0 = dhCur.data() + static_cast<std::size_t>(v) * H;
            const double* z = st.update[t].data() + static_cast<std::size_t>(v) * H;
            const double* r = st.reset[t].data() + static_cast<std::size_t>(v) * H;
            const double* c = st.candidate[t].data() + static_cast<std::size_t>(v) * H;
            const double* msg = st.message[t].data() + static_cast<std::size_t>(v) * H;
            double* dhp = dhPrev.data() + static_cast<std::size_t>(v) * H;

            // h' = (1-z) h + z c
            for (int i = 0; i < H; ++i) {
                dz[i] = g0[i] * (c[i] - hv[i]);
                dc[i] = g0[i] * z[i];
                dhp[i] += g0[i] * (1.0 - z[i]);
            }

            std::fill(dm.begin(), dm.end(), 0.0);

            // candidate path: c = tanh(Wc [m; r*h] + bc)
            for (int i = 0; i < H; ++i) dact[i] = dc[i] * (1.0 - c[i] * c[i]);
            std::copy(msg, msg + H, cat.begin());
            for (int i = 0; i < H; ++i) cat[H + i] = r[i] * hv[i];
            outerAdd(grads.candidateWeight, dact.data(), cat.data());
            for (int i = 0; i < H; ++i) grads.candidateBias.data[i] += dact[i];
            std::fill(dcat.begin(), dcat.end(), 0.0);
            matTvecAdd(m.candidateWeight, dact.data(), dcat.data());
            for (int i = 0; i < H; ++i) {
                dm[i] += dcat[i];
                dr[i] = dcat[H + i] * hv[i];
                dhp[i] += dcat[H + i] * r[i];
            }

            // gate paths: z/r = sigmoid(W [m; h] + b)
            std::copy(msg, msg + H, cat.begin());
            std::copy(hv, hv + H, cat.begin() + H);

            for (int i = 0; i < H; ++i) dact[i] = dr[i] * r[i] * (1.0 - r[i]);
            outerAdd(grads.resetWeight, dact.data(), cat.data());
            for (int i = 0; i < H; ++i) grads.resetBias.data[i] += dact[i];
            std::fill(dcat.begin(), dcat.end(), 0.0);
            matTvecAdd(m.resetWeight, dact.data(), dcat.data());
            for (int i = 0; i < H; ++i) {
                dm[i] += dcat[i];
                dhp[i] += dcat[H + i];
            }

            for (int i = 0; i < H; ++i) dact[i] = dz[i] * z[i] * (1.0 - z[i]);
            outerAdd(grads.updateWeight, dact.data(), cat.data());
            for (int i = 0; i < H; ++i) grads.updateBias.data[i] += dact[i];
            std::fill(dcat.begin(), dcat.end(), 0.0);
            matTvecAdd(m.updateWeight, dact.data(), dcat.data());
            for (int i = 0; i < H; ++i) {
                dm[i] += dcat[i];
                dhp[i] += dcat[H + i];
            }

            // message aggregation
            const int begin = csr.offsets[v], end = csr.offsets[v + 1];
            if (m.attention && end > begin) {
                const double* att = st.attCoeff[t].data();
                // da_e, then softmax backward, then the two score halves.
                daScratch.resize(end - begin);
                double sum = 0.0;
                for (int e = begin; e < end; ++e) {
                    const double* tu =
                        st.transformed[t].data() + static_cast<std::size_t>(csr.nbr[e]) * H;
                    double dot = 0.0;
                    for (int i = 0; i < H; ++i) dot += dm[i] * tu[i];
                    daScratch[e - begin] = dot;
                    sum += att[e] * dot;
                }
                double dSelf = 0.0;
                const double* wRecv = m.attentionWeight.data.data();
                for (int e = begin; e < end; ++e) {
                    const double de = att[e] * (daScratch[e - begin] - sum);
                    dSelf += de;
                    dNbrScore[csr.nbr[e]] += de;
                    double* dtu =
                        dTransformed.data() + static_cast<std::size_t>(csr.nbr[e]) * H;
                    for (int i = 0; i < H; ++i) dtu[i] += att[e] * dm[i];
                }
                for (int i = 0; i < H; ++i) {
                    grads.attentionWeight.data[i] += dSelf * hv[i];
                    dhp[i] += dSelf * wRecv[i];
                }
            } else {
                for (int e = begin; e < end; ++e) {
                    double* dtu = dTransformed.data() + static_cast<std::size_t>(csr.nbr[e]) * H;
                    for (int i = 0; i < H; ++i) dtu[i] += dm[i];
                }
            }
        }

        if (m.attention) {
            // Sender-side score gradients, accumulated across all receivers.
            const double* wSend = m.attentionWeight.data.data() + H;
            for (int u = 0; u < nodes; ++u) {
                const double d = dNbrScore[u];
                if (d == 0.0) continue;
                const double* hu = prev.data() + static_cast<std::size_t>(u) * H;
                double* dhu = dhPrev.data() + static_cast<std::size_t>(u) * H;
                for (int i = 0; i < H; ++i) {
                    grads.attentionWeight.data[H + i] += d * hu[i];
                    dhu[i] += d * wSend[i];
                }
            }
        }

        // transformed_u = W_m h_u
        for (int u = 0; u < nodes; ++u) {
            const double* dtu = dTransformed.data() + static_cast<std::size_t>(u) * H;
            const double* hu = prev.data() + static_cast<std::size_t>(u) * H;
            outerAdd(grads.messageWeight, dtu, hu);
            matTvecAdd(m.messageWeight, dtu, dhPrev.data() + static_cast<std::size_t>(u) * H);
        }

        std::swap(dhCur, dhPrev);
    }

    // Input encoders.
    for (int v = 0; v < nodes; ++v) {
        const int type = static_cast<int>(g.nodeTypes[v]);
        const double* dh0 = dhCur.data() + static_cast<std::size_t>(v) * H;
        outerAdd(grads.encoderWeight[type], dh0, g.features[v].data());
        for (int i = 0; i < H; ++i) grads.encoderBias[type].data[i] += dh0[i];
    }

    return lossValue;
}

namespace {

struct AdamState {
    ModelParams m1;
    ModelParams m2;
    std::int64_t step = 0;
};

void adamStep(ModelParams& model, ModelParams& grads, AdamState& adam, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    adam.step++;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));

    std::vector<Tensor*> ps, gs, m1s, m2s;
    model.visit([&](const std::string&, Tensor& t) { ps.push_back(&t); });
    grads.visit([&](const std::string&, Tensor& t) { gs.push_back(&t); });
    adam.m1.visit([&](const std::string&, Tensor& t) { m1s.push_back(&t); });
    adam.m2.visit([&](const std::string&, Tensor& t) { m2s.push_back(&t); });

    for (std::size_t k = 0; k < ps.size(); ++k) {
        double* p = ps[k]->data.data();
        const double* gr = gs[k]->data.data();
        double* m1 = m1s[k]->data.data();
        double* m2 = m2s[k]->data.data();
        for (std::size_t i = 0; i < ps[k]->size(); ++i) {
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * gr[i];
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * gr[i] * gr[i];
            p[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps);
        }
    }
}

}  // namespace

ModelParams initModel(int hidden, int iterations, bool attention, std::uint64_t seed) {
    ModelParams model = ModelParams::zeros(hidden, iterations, attention);
    Rng rng(deriveStream(seed, 0x747261696eULL));
    model.visit([&rng](const std::string& name, Tensor& t) {
        if (name.ends_with(".bias")) return;
        const double scale = 1.0 / std::sqrt(static_cast<double>(t.cols));
        for (double& w : t.data) w = (2.0 * rng.uniform01() - 1.0) * scale;
    });
    return model;
}

TrainResult trainEpochs(const std::vector<TrainSample>& data, const TrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("no training samples");

    ModelParams model = initModel(cfg.hidden, cfg.iterations, cfg.attention, cfg.seed);
    Rng rng(deriveStream(cfg.seed, 0x736875666cULL));  // shuffle stream

    AdamState adam{ModelParams::zeros(cfg.hidden, cfg.iterations, cfg.attention),
                   ModelParams::zeros(cfg.hidden, cfg.iterations, cfg.attention), 0};
    ModelParams grads = ModelParams::zeros(cfg.hidden, cfg.iterations, cfg.attention);
    ModelParams batchGrads = ModelParams::zeros(cfg.hidden, cfg.iterations, cfg.attention);

    std::vector<Tensor*> gradTensors, batchTensors;
    grads.visit([&](const std::string&, Tensor& t) { gradTensors.push_back(&t); });
    batchGrads.visit([&](const std::string&, Tensor& t) { batchTensors.push_back(&t); });

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epochLoss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batchSize)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batchSize));
            const double w = 1.0 / static_cast<double>(stop - start);
            for (Tensor* t : batchTensors) t->zero();
            for (std::size_t i = start; i < stop; ++i) {
                for (Tensor* t : gradTensors) t->zero();
                epochLoss += gradients(model, data[order[i]], grads);
                for (std::size_t k = 0; k < gradTensors.size(); ++k)
                    for (std::size_t j = 0; j < gradTensors[k]->size(); ++j)
                        batchTensors[k]->data[j] += w * gradTensors[k]->data[j];
            }
            adamStep(model, batchGrads, adam, cfg.learningRate);
        }
        result.epochLoss.push_back(epochLoss / static_cast<double>(data.size()));
    }
    result.model = std::move(model);
    return result;
}

void saveModel(const ModelParams& m, const std::string& path) {
    nlohmann::ordered_json j;
    j["hidden"] = m.hidden;
    j["iterations"] = m.iterations;
    j["attention"] = m.attention;
    j["tensors"] = nlohmann::ordered_json::object();
    m.visit([&j](const std::string& name, const Tensor& t) {
        j["tensors"][name] = {{"shape", {t.rows, t.cols}}, {"data", t.data}};
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams loadModel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("checkpoint parse error: ") + e.what());
    }
    for (const char* key : {"hidden", "iterations", "attention", "tensors"}) {
        if (!j.contains(key))
            throw std::runtime_error(std::string("checkpoint missing key: ") + key);
    }
    ModelParams m = ModelParams::zeros(j["hidden"].get<int>(), j["iterations"].get<int>(),
                                       j["attention"].get<bool>());
    const auto& tensors = j["tensors"];
    m.visit([&tensors](const std::string& name, Tensor& t) {
        if (!tensors.contains(name))
            throw ShapeError("checkpoint missing tensor: " + name);
        const auto& jt = tensors[name];
        const auto shape = jt["shape"].get<std::vector<int>>();
        if (shape.size() != 2 || shape[0] != t.rows || shape[1] != t.cols)
            throw ShapeError("tensor shape mismatch: " + name);
        const auto data = jt["data"].get<std::vector<double>>();
        if (data.size() != t.size()) throw ShapeError("tensor shape mismatch: " + name);
        t.data = data;
    });
    return m;
}

}  // namespace nctma
