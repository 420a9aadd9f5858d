#include "gridrel/load_shedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gridrel {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// min c'x  s.t.  A x = b,  0 <= x <= u  (dense, bounded-variable simplex,
// Bland's rule). Small problems only.
class BoundedSimplex {
  public:
    BoundedSimplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> u)
        : a_(std::move(a)), b_(std::move(b)), upper_(std::move(u)) {
        m_ = a_.size();
        n_struct_ = m_ ? a_[0].size() : 0;
    }

    // Returns false when infeasible. x() then has no meaning.
    bool solve(const std::vector<double>& cost) {
        // Make b non-negative, append artificial columns.
        size_t n = n_struct_ + m_;
        tab_.assign(m_, std::vector<double>(n, 0.0));
        rhs_ = b_;
        for (size_t i = 0; i < m_; ++i) {
            double sign = rhs_[i] < 0.0 ? -1.0 : 1.0;
            rhs_[i] *= sign;
            for (size_t j = 0; j < n_struct_; ++j) tab_[i][j] = sign * a_[i][j];
            tab_[i][n_struct_ + i] = 1.0;
        }
        upper_.resize(n, kInf);
        x_.assign(n, 0.0);
        status_.assign(n, AtLower);
        basis_.resize(m_);
        for (size_t i = 0; i < m_; ++i) {
            basis_[i] = n_struct_ + i;
            status_[n_struct_ + i] = Basic;
            x_[n_struct_ + i] = rhs_[i];
        }

        std::vector<double> phase1(n, 0.0);
        for (size_t i = 0; i < m_; ++i) phase1[n_struct_ + i] = 1.0;
        run(phase1);
        double infeas = 0.0;
        for (size_t i = 0; i < m_; ++i) infeas += x_[n_struct_ + i];
        if (infeas > 1e-7) return false;

        // Freeze artificials at zero and optimize the real objective.
        for (size_t j = n_struct_; j < n; ++j) upper_[j] = 0.0;
        for (size_t j = n_struct_; j < n; ++j)
            if (status_[j] != Basic) x_[j] = 0.0;
        std::vector<double> full_cost(n, 0.0);
        for (size_t j = 0; j < n_struct_ && j < cost.size(); ++j) full_cost[j] = cost[j];
        run(full_cost);
        return true;
    }

    double x(size_t j) const { return x_[j]; }

  private:
    enum Status { Basic, AtLower, AtUpper };

    void run(const std::vector<double>& cost) {
        size_t n = tab_.empty() ? 0 : tab_[0].size();
        for (long pivots = 0;; ++pivots) {
            if (pivots > 50000) throw std::runtime_error("solve_shed: simplex failed to terminate");
            // Reduced costs: d = c - c_B * T.
            std::vector<double> cb(m_);
            for (size_t i = 0; i < m_; ++i) cb[i] = cost[static_cast<size_t>(basis_[i])];
            size_t enter = n;
            double dir = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (status_[j] == Basic || upper_[j] < kEps) continue;
                double d = cost[j];
                for (size_t i = 0; i < m_; ++i)
                    if (cb[i] != 0.0) d -= cb[i] * tab_[i][j];
                if (status_[j] == AtLower && d < -kEps) {
                    enter = j;
                    dir = 1.0;
                    break;  // Bland: lowest index
                }
                if (status_[j] == AtUpper && d > kEps) {
                    enter = j;
                    dir = -1.0;
                    break;
                }
            }
            if (enter == n) return;  // optimal

            // Ratio test: how far x_enter can move before a basic variable or
            // its own opposite bound stops it. Ties pick the lowest basic
            // variable index (Bland).
            double t_max = upper_[enter];
            long leave_row = -1;
            int leave_to = AtLower;
            for (size_t i = 0; i < m_; ++i) {
                double step = dir * tab_[i][enter];
                size_t bi = static_cast<size_t>(basis_[i]);
                double t;
                int to;
                if (step > kEps) {  // basic decreases toward 0
                    t = std::max(0.0, x_[bi] / step);
                    to = AtLower;
                } else if (step < -kEps && upper_[bi] != kInf) {  // basic grows toward its cap
                    t = std::max(0.0, (upper_[bi] - x_[bi]) / (-step));
                    to = AtUpper;
                } else {
                    continue;
                }
                bool better = t < t_max - kEps;
                bool tie = !better && t < t_max + kEps &&
                           (leave_row >= 0 ? basis_[i] < basis_[static_cast<size_t>(leave_row)] : false);
                if (better || tie) {
                    t_max = std::min(t_max, t);
                    leave_row = static_cast<long>(i);
                    leave_to = to;
                }
            }
            if (t_max == kInf) throw std::runtime_error("solve_shed: unbounded objective");

            // Apply the move.
            for (size_t i = 0; i < m_; ++i) {
                size_t bi = static_cast<size_t>(basis_[i]);
                x_[bi] -= t_max * dir * tab_[i][enter];
            }
            x_[enter] += dir * t_max;

            if (leave_row < 0) {
                // Bound flip, basis unchanged.
                status_[enter] = status_[enter] == AtLower ? AtUpper : AtLower;
                x_[enter] = status_[enter] == AtUpper ? upper_[enter] : 0.0;
                continue;
            }

            size_t r = static_cast<size_t>(leave_row);
            size_t leaving = static_cast<size_t>(basis_[r]);
            status_[leaving] = leave_to;
            x_[leaving] = leave_to == AtUpper ? upper_[leaving] : 0.0;
            if (leaving >= n_struct_) upper_[leaving] = 0.0;  // artificials never come back
            status_[enter] = Basic;
            basis_[r] = static_cast<long>(enter);

            double piv = tab_[r][enter];
            for (size_t j = 0; j < n; ++j) tab_[r][j] /= piv;
            for (size_t i = 0; i < m_; ++i) {
                if (i == r) continue;
                double f = tab_[i][enter];
                if (f == 0.0) continue;
                for (size_t j = 0; j < n; ++j) tab_[i][j] -= f * tab_[r][j];
            }
        }
    }

    std::vector<std::vector<double>> a_;
    std::vector<double> b_;
    std::vector<double> upper_;
    std::vector<std::vector<double>> tab_;
    std::vector<double> rhs_;
    std::vector<double> x_;
    std::vector<int> status_;
    std::vector<long> basis_;
    size_t m_ = 0;
    size_t n_struct_ = 0;
};

}  // namespace

ShedSolution solve_shed(const ShedProblem& problem) {
    const size_t nl = problem.loads.size();
    const size_t ng = problem.gens.size();
    const size_t nf = problem.lines.size();
    const size_t n = nl + ng + nf;
    const size_t m = static_cast<size_t>(problem.node_count);

    for (const auto& ld : problem.loads)
        if (ld.node < 0 || ld.node >= problem.node_count) throw std::invalid_argument("solve_shed: load node out of range");
    for (const auto& g : problem.gens)
        if (g.node < 0 || g.node >= problem.node_count) throw std::invalid_argument("solve_shed: gen node out of range");
    for (const auto& ln : problem.lines)
        if (ln.from_node < 0 || ln.from_node >= problem.node_count || ln.to_node < 0 || ln.to_node >= problem.node_count)
            throw std::invalid_argument("solve_shed: line node out of range");

    auto cap = [](double c) { return std::min(std::max(c, 0.0), 1e8); };

    // Variables: [shed per load | gen above min | flow above -cap_rev].
    std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
    std::vector<double> b(m, 0.0);
    std::vector<double> u(n, 0.0);
    std::vector<double> cost(n, 0.0);

    for (size_t k = 0; k < nl; ++k) {
        const auto& ld = problem.loads[k];
        a[static_cast<size_t>(ld.node)][k] = -1.0;
        b[static_cast<size_t>(ld.node)] -= ld.demand_mw;
        u[k] = std::max(0.0, ld.demand_mw);
        cost[k] = ld.cost;
    }
    for (size_t j = 0; j < ng; ++j) {
        const auto& g = problem.gens[j];
        a[static_cast<size_t>(g.node)][nl + j] = -1.0;
        b[static_cast<size_t>(g.node)] += g.min_mw;
        u[nl + j] = std::max(0.0, g.max_mw - g.min_mw);
        cost[nl + j] = g.cost;
    }
    for (size_t i = 0; i < nf; ++i) {
        const auto& ln = problem.lines[i];
        double crev = cap(ln.cap_rev_mw);
        a[static_cast<size_t>(ln.from_node)][nl + ng + i] += 1.0;
        a[static_cast<size_t>(ln.to_node)][nl + ng + i] -= 1.0;
        b[static_cast<size_t>(ln.from_node)] += crev;
        b[static_cast<size_t>(ln.to_node)] -= crev;
        u[nl + ng + i] = cap(ln.cap_fwd_mw) + crev;
    }

    ShedSolution sol;
    sol.shed_mw.assign(nl, 0.0);
    sol.gen_mw.assign(ng, 0.0);
    sol.flow_mw.assign(nf, 0.0);

    BoundedSimplex simplex(std::move(a), std::move(b), std::move(u));
    bool ok = simplex.solve(cost);
    if (!ok) {
        sol.feasible = false;
        for (size_t k = 0; k < nl; ++k) {
            sol.shed_mw[k] = problem.loads[k].demand_mw;
            sol.cost += problem.loads[k].cost * problem.loads[k].demand_mw;
        }
        for (size_t j = 0; j < ng; ++j) sol.gen_mw[j] = problem.gens[j].min_mw;
        return sol;
    }

    sol.feasible = true;
    for (size_t k = 0; k < nl; ++k) {
        double s = std::clamp(simplex.x(k), 0.0, std::max(0.0, problem.loads[k].demand_mw));
        sol.shed_mw[k] = s;
        sol.cost += problem.loads[k].cost * s;
    }
    for (size_t j = 0; j < ng; ++j) {
        sol.gen_mw[j] = problem.gens[j].min_mw + simplex.x(nl + j);
        sol.gen_cost += problem.gens[j].cost * sol.gen_mw[j];
    }
    for (size_t i = 0; i < nf; ++i) sol.flow_mw[i] = simplex.x(nl + ng + i) - cap(problem.lines[i].cap_rev_mw);
    return sol;
}

}  // namespace gridrel
