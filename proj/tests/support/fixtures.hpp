#pragma once

// Small hand-checked networks shared by the unit and acceptance tests.
//
// Example A: two identical servers RL(1,1) in a chain; the flow of interest
// TB(0.1,1) and one cross flow TB(0.2,0.5) both traverse the whole chain.
// Hand computation: full tandem residual RL(0.8, 3.125) -> delay 35/8;
// cutting pays the cross flow's output burst again -> delay 50/9.
//
// Example B: slow server RL(1,1) then fast server RL(10,1); the cross flow
// TB(0.5,5) hits only the fast server. Keeping the tandem whole drags the
// cross burst through the bottleneck rate 1 -> delay 8.5; cutting isolates
// it at the fast server -> delay 68/19.

#include "nctma/network.hpp"

namespace fixtures {

inline nctma::Network exampleA() {
    nctma::Network n;
    n.id = 0;
    n.servers = {{0, {1.0, 1.0}}, {1, {1.0, 1.0}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.1, 1.0}, {0, 1}}, {1, {0.2, 0.5}, {0, 1}}};
    return n;
}

constexpr double kExampleANoCut = 4.375;            // 35/8
constexpr double kExampleACut = 50.0 / 9.0;         // 5.5555...
constexpr double kExampleACrossBoundBurst = 0.9444444444444445;

inline nctma::Network exampleB() {
    nctma::Network n;
    n.id = 1;
    n.servers = {{0, {1.0, 1.0}}, {1, {10.0, 1.0}}};
    n.links = {{0, 1}};
    n.flows = {{0, {0.1, 1.0}, {0, 1}}, {1, {0.5, 5.0}, {1}}};
    return n;
}

constexpr double kExampleBNoCut = 8.5;
constexpr double kExampleBCut = 68.0 / 19.0;  // 3.5789473...

}  // namespace fixtures
