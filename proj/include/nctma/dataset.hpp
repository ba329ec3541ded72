#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nctma/network.hpp"

namespace nctma {

// Schema or I/O problem in a dataset file; message carries the line number.
struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One JSON object per line:
// {"id": int,
//  "servers": [{"id": int, "rate": float, "latency": float}],
//  "links": [[int,int]],
//  "flows": [{"id": int, "rate": float, "burst": float, "path": [int]}],
//  "labels": [{"flow": int, "cuts": [int], "delay": float}]}   (optional)
// Floats are written as shortest round-trip decimals; load(save(x)) == x.
std::string toJsonLine(const Network& n);
Network fromJsonLine(const std::string& line, int lineNumber = 0);

void saveDataset(const std::vector<Network>& networks, const std::string& path);
std::vector<Network> loadDataset(const std::string& path);

}  // namespace nctma
