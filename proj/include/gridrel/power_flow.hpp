#pragma once

#include <string>
#include <vector>

#include "gridrel/network.hpp"

namespace gridrel {

// Per-bus net consumption in per unit on the network s_base (loads positive,
// generation negative). Indexed like RadialNetwork::buses.
struct Injections {
    std::vector<double> p_pu;
    std::vector<double> q_pu;
};

struct FbsOptions {
    double tolerance = 1e-6;
    int max_iterations = 100;
};

struct FlowSolution {
    bool converged = false;
    int iterations = 0;
    std::vector<double> v_pu;       // per bus; 0 for buses outside the sub-system
    std::vector<double> delta_rad;  // per bus
    std::vector<double> line_p_pu;  // sending-end active power per line, 0 if out
    std::vector<double> line_q_pu;
    double loss_p_pu = 0.0;
    double loss_q_pu = 0.0;
    double root_injection_p_pu = 0.0;  // power the root feeds into the sub-system
    double root_injection_q_pu = 0.0;
    // Worst nodal power mismatch (real or reactive, per unit) when the solved
    // phasors are plugged back into the branch equations. An independent
    // physics check, not a by-product of the sweep's own bookkeeping.
    double balance_residual_pu = 0.0;
};

// Forward-backward sweep over one radial sub-system. The root bus acts as the
// voltage reference (slack); throws std::invalid_argument if the sub-system
// lines do not form a tree over its buses or the root is not a member.
FlowSolution solve_fbs(const RadialNetwork& net, const SubSystem& sub, const Injections& inj, int root_bus,
                       double root_voltage_pu = 1.0, const FbsOptions& opt = {});

}  // namespace gridrel
