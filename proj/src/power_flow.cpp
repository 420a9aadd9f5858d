#include "gridrel/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace gridrel {

FlowSolution solve_fbs(const RadialNetwork& net, const SubSystem& sub, const Injections& inj, int root_bus,
                       double root_voltage_pu, const FbsOptions& opt) {
    const size_t nbus = net.buses.size();
    FlowSolution sol;
    sol.v_pu.assign(nbus, 0.0);
    sol.delta_rad.assign(nbus, 0.0);
    sol.line_p_pu.assign(net.lines.size(), 0.0);
    sol.line_q_pu.assign(net.lines.size(), 0.0);

    if (std::find(sub.bus_idx.begin(), sub.bus_idx.end(), root_bus) == sub.bus_idx.end())
        throw std::invalid_argument("solve_fbs: root bus is not part of the sub-system");
    if (sub.line_idx.size() != sub.bus_idx.size() - 1)
        throw std::invalid_argument("solve_fbs: sub-system is not a tree");

    std::vector<bool> in_sub_line(net.lines.size(), false);
    for (int l : sub.line_idx) in_sub_line[static_cast<size_t>(l)] = true;

    // Root the tree: BFS order with parent pointers. Traversal order is fixed
    // by the network's sorted adjacency, so input ordering cannot matter.
    std::vector<int> order;
    order.reserve(sub.bus_idx.size());
    std::vector<int> parent_bus(nbus, -1), parent_line(nbus, -1);
    std::vector<bool> seen(nbus, false);
    order.push_back(root_bus);
    seen[static_cast<size_t>(root_bus)] = true;
    for (size_t qi = 0; qi < order.size(); ++qi) {
        int b = order[qi];
        for (auto [line, other] : net.adjacent(b)) {
            if (!in_sub_line[static_cast<size_t>(line)] || seen[static_cast<size_t>(other)]) continue;
            seen[static_cast<size_t>(other)] = true;
            parent_bus[static_cast<size_t>(other)] = b;
            parent_line[static_cast<size_t>(other)] = line;
            order.push_back(other);
        }
    }
    if (order.size() != sub.bus_idx.size())
        throw std::invalid_argument("solve_fbs: sub-system is not connected");

    for (int b : sub.bus_idx) sol.v_pu[static_cast<size_t>(b)] = root_voltage_pu;

    // Per line: receiving-end power (downstream loads plus every loss below)
    // and the line's own ohmic loss, evaluated at its receiving bus voltage.
    // Sending-end power is their sum, so the fixed point of the sweep is the
    // exact power flow including loss-on-loss compounding.
    std::vector<double> acc_p(net.lines.size(), 0.0), acc_q(net.lines.size(), 0.0);
    std::vector<double> loss_p(net.lines.size(), 0.0), loss_q(net.lines.size(), 0.0);
    std::vector<double> sum_p(nbus, 0.0), sum_q(nbus, 0.0);

    bool diverged = false;
    int polish_sweeps = 0;
    for (sol.iterations = 1;; ++sol.iterations) {
        // Backward sweep, leaves first.
        for (int b : order) {
            sum_p[static_cast<size_t>(b)] = inj.p_pu[static_cast<size_t>(b)];
            sum_q[static_cast<size_t>(b)] = inj.q_pu[static_cast<size_t>(b)];
        }
        for (size_t qi = order.size(); qi-- > 1;) {
            int b = order[qi];
            int line = parent_line[static_cast<size_t>(b)];
            int up = parent_bus[static_cast<size_t>(b)];
            const Line& ln = net.lines[static_cast<size_t>(line)];
            double pl = sum_p[static_cast<size_t>(b)];
            double ql = sum_q[static_cast<size_t>(b)];
            double v_recv = sol.v_pu[static_cast<size_t>(b)];
            double v2 = std::max(v_recv * v_recv, 1e-6);
            double lp = ln.resistance * (pl * pl + ql * ql) / v2;
            double lq = ln.reactance * (pl * pl + ql * ql) / v2;
            acc_p[static_cast<size_t>(line)] = pl;
            acc_q[static_cast<size_t>(line)] = ql;
            loss_p[static_cast<size_t>(line)] = lp;
            loss_q[static_cast<size_t>(line)] = lq;
            sum_p[static_cast<size_t>(up)] += pl + lp;
            sum_q[static_cast<size_t>(up)] += ql + lq;
        }

        // Forward sweep from the root.
        double max_dv = 0.0;
        diverged = false;
        for (size_t qi = 1; qi < order.size(); ++qi) {
            int b = order[qi];
            int line = parent_line[static_cast<size_t>(b)];
            int up = parent_bus[static_cast<size_t>(b)];
            const Line& ln = net.lines[static_cast<size_t>(line)];
            double pl = acc_p[static_cast<size_t>(line)] + loss_p[static_cast<size_t>(line)];
            double ql = acc_q[static_cast<size_t>(line)] + loss_q[static_cast<size_t>(line)];
            double vj = sol.v_pu[static_cast<size_t>(up)];
            double vj2 = vj * vj;
            double t1 = 2.0 * (pl * ln.resistance + ql * ln.reactance);
            double t2 = (pl * pl + ql * ql) * (ln.resistance * ln.resistance + ln.reactance * ln.reactance) / vj2;
            double v2 = vj2 - t1 + t2;
            // Written so a NaN (overflowing losses under an unservable load)
            // lands in the diverged branch instead of slipping past.
            if (!(v2 > 0.0) || !std::isfinite(v2)) {
                diverged = true;
                break;
            }
            double v_new = std::sqrt(v2);
            max_dv = std::max(max_dv, std::abs(v_new - sol.v_pu[static_cast<size_t>(b)]));
            sol.v_pu[static_cast<size_t>(b)] = v_new;
            // Angle relative to the sending bus.
            double re = vj - (pl * ln.resistance + ql * ln.reactance) / vj;
            double im = -(pl * ln.reactance - ql * ln.resistance) / vj;
            sol.delta_rad[static_cast<size_t>(b)] = sol.delta_rad[static_cast<size_t>(up)] + std::atan2(im, re);
        }
        if (diverged) break;
        if (max_dv < opt.tolerance) sol.converged = true;
        if (sol.converged) {
            // A few extra sweeps after the documented tolerance drive the
            // iterate onto the fixed point, so the plug-in residual below
            // measures physics rather than the stopping rule.
            ++polish_sweeps;
            if (max_dv < 1e-14 || polish_sweeps > 8) break;
        } else if (sol.iterations >= opt.max_iterations) {
            break;
        }
    }

    for (int l : sub.line_idx) {
        sol.line_p_pu[static_cast<size_t>(l)] = acc_p[static_cast<size_t>(l)] + loss_p[static_cast<size_t>(l)];
        sol.line_q_pu[static_cast<size_t>(l)] = acc_q[static_cast<size_t>(l)] + loss_q[static_cast<size_t>(l)];
        sol.loss_p_pu += loss_p[static_cast<size_t>(l)];
        sol.loss_q_pu += loss_q[static_cast<size_t>(l)];
    }

    sol.root_injection_p_pu = sum_p[static_cast<size_t>(root_bus)];
    sol.root_injection_q_pu = sum_q[static_cast<size_t>(root_bus)];

    // Independent check: plug the solved phasors back into the branch
    // equations and take the worst nodal power mismatch.
    double worst = 0.0;
    std::vector<std::complex<double>> v_cplx(nbus);
    std::vector<std::complex<double>> mismatch(nbus);
    for (int b : sub.bus_idx) {
        v_cplx[static_cast<size_t>(b)] = std::polar(sol.v_pu[static_cast<size_t>(b)], sol.delta_rad[static_cast<size_t>(b)]);
        mismatch[static_cast<size_t>(b)] =
            std::complex<double>(inj.p_pu[static_cast<size_t>(b)], inj.q_pu[static_cast<size_t>(b)]);
    }
    for (int l : sub.line_idx) {
        const Line& ln = net.lines[static_cast<size_t>(l)];
        std::complex<double> z(ln.resistance, ln.reactance);
        if (std::abs(z) < 1e-12) z = {1e-12, 0.0};
        int f = net.bus_index(ln.from_bus);
        int t = net.bus_index(ln.to_bus);
        std::complex<double> i_line = (v_cplx[static_cast<size_t>(f)] - v_cplx[static_cast<size_t>(t)]) / z;
        mismatch[static_cast<size_t>(f)] += v_cplx[static_cast<size_t>(f)] * std::conj(i_line);
        mismatch[static_cast<size_t>(t)] += v_cplx[static_cast<size_t>(t)] * std::conj(-i_line);
    }
    for (int b : sub.bus_idx) {
        if (b == root_bus) continue;
        double m = std::max(std::abs(mismatch[static_cast<size_t>(b)].real()),
                            std::abs(mismatch[static_cast<size_t>(b)].imag()));
        if (!std::isfinite(m))
            worst = std::numeric_limits<double>::infinity();
        else if (worst < m)
            worst = m;
    }
    sol.balance_residual_pu = worst;
    return sol;
}

}  // namespace gridrel
