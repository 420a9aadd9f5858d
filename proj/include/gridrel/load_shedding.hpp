#pragma once

#include <vector>

namespace gridrel {

// Lossless linear shedding problem on a (sub-)network. Nodes are dense
// indices local to the problem; multiple load entries per node are allowed.
struct ShedLoad {
    int node = 0;
    double demand_mw = 0.0;
    double cost = 0.0;  // per MWh shed
};

struct ShedGen {
    int node = 0;
    double min_mw = 0.0;
    double max_mw = 0.0;
    double cost = 0.0;  // dispatch preference; orders of magnitude below shed costs
};

struct ShedLine {
    int from_node = 0;
    int to_node = 0;
    double cap_fwd_mw = 0.0;  // max flow from -> to
    double cap_rev_mw = 0.0;  // max flow to -> from
};

struct ShedProblem {
    int node_count = 0;
    std::vector<ShedLoad> loads;
    std::vector<ShedGen> gens;
    std::vector<ShedLine> lines;
};

struct ShedSolution {
    bool feasible = false;
    double cost = 0.0;      // shed cost only
    double gen_cost = 0.0;  // dispatch preference cost actually incurred
    std::vector<double> shed_mw;  // per load entry
    std::vector<double> gen_mw;   // per generator entry
    std::vector<double> flow_mw;  // per line entry, signed from -> to
};

// Minimizes total shed cost subject to per-node power balance, generator
// limits, shed bounds [0, demand] and line transfer limits. Exact two-phase
// simplex with Bland's lowest-index rule, so results are deterministic and
// ties between equal-cost sheds resolve to the earliest entry. If no balance
// exists even with maximal shedding, feasible is false and everything is shed.
ShedSolution solve_shed(const ShedProblem& problem);

}  // namespace gridrel
