#include "nctma/dataset.hpp"

#include <fstream>

#include <json.hpp>

namespace nctma {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(int line, const std::string& what) {
    throw DatasetError("dataset line " + std::to_string(line) + ": " + what);
}

const Json& field(const Json& obj, const char* key, int line) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(line, std::string("missing \"") + key + "\" key");
    return *it;
}

}  // namespace

std::string toJsonLine(const Network& n) {
    Json j;
    j["id"] = n.id;
    j["servers"] = Json::array();
    for (const Server& s : n.servers) {
        j["servers"].push_back(
            {{"id", s.id}, {"rate", s.service.rate}, {"latency", s.service.latency}});
    }
    j["links"] = Json::array();
    for (const auto& [from, to] : n.links) j["links"].push_back({from, to});
    j["flows"] = Json::array();
    for (const Flow& f : n.flows) {
        j["flows"].push_back({{"id", f.id},
                              {"rate", f.arrival.rate},
                              {"burst", f.arrival.burst},
                              {"path", f.path}});
    }
    if (n.labels) {
        j["labels"] = Json::array();
        for (const FlowLabel& l : *n.labels) {
            j["labels"].push_back({{"flow", l.flow}, {"cuts", l.cuts}, {"delay", l.delay}});
        }
    }
    return j.dump();
}

Network fromJsonLine(const std::string& line, int lineNumber) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::parse_error& e) {
        fail(lineNumber, e.what());
    }
    if (!j.is_object()) fail(lineNumber, "not a JSON object");

    Network n;
    try {
        n.id = field(j, "id", lineNumber).get<int>();
        for (const Json& js : field(j, "servers", lineNumber)) {
            Server s;
            s.id = field(js, "id", lineNumber).get<int>();
            s.service.rate = field(js, "rate", lineNumber).get<double>();
            s.service.latency = field(js, "latency", lineNumber).get<double>();
            n.servers.push_back(s);
        }
        for (const Json& jl : field(j, "links", lineNumber)) {
            if (!jl.is_array() || jl.size() != 2) fail(lineNumber, "link is not a pair");
            n.links.insert({jl[0].get<int>(), jl[1].get<int>()});
        }
        for (const Json& jf : field(j, "flows", lineNumber)) {
            Flow f;
            f.id = field(jf, "id", lineNumber).get<int>();
            f.arrival.rate = field(jf, "rate", lineNumber).get<double>();
            f.arrival.burst = field(jf, "burst", lineNumber).get<double>();
            f.path = field(jf, "path", lineNumber).get<std::vector<int>>();
            n.flows.push_back(f);
        }
        if (j.contains("labels")) {
            std::vector<FlowLabel> labels;
            for (const Json& jl : j["labels"]) {
                FlowLabel l;
                l.flow = field(jl, "flow", lineNumber).get<int>();
                l.cuts = field(jl, "cuts", lineNumber).get<std::vector<int>>();
                l.delay = field(jl, "delay", lineNumber).get<double>();
                labels.push_back(l);
            }
            n.labels = std::move(labels);
        }
    } catch (const Json::exception& e) {
        fail(lineNumber, e.what());
    }
    return n;
}

void saveDataset(const std::vector<Network>& networks, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot open for writing: " + path);
    for (const Network& n : networks) out << toJsonLine(n) << '\n';
    if (!out) throw DatasetError("write failed: " + path);
}

std::vector<Network> loadDataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open for reading: " + path);
    std::vector<Network> networks;
    std::string line;
    int lineNumber = 0;
    while (std::getline(in, line)) {
        ++lineNumber;
        if (line.empty()) continue;
        networks.push_back(fromJsonLine(line, lineNumber));
    }
    return networks;
}

}  // namespace nctma
