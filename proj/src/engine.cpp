#include "gridrel/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "gridrel/gamma.hpp"
#include "gridrel/load_shedding.hpp"
#include "gridrel/power_flow.hpp"
#include "gridrel/rng.hpp"

namespace gridrel {

namespace {
constexpr double kShedTol = 1e-9;
constexpr double kSlackCost = 1e-6;    // dispatch preference: renewables, then slack,
constexpr double kBatteryCost = 1e-3;  // then the battery; all far below shed costs
// In an island the microgrid supplies, its own load is served before any
// distribution-system load regardless of tariff class: added to the shedding
// objective only, never to the interruption-cost accounting.
constexpr double kMicrogridPriorityCost = 1e6;
}  // namespace

double ResultSet::mean_dist_ens() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.distribution.ens_mwh;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

double ResultSet::mean_mg_ens() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.microgrid.ens_mwh;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

std::vector<double> ResultSet::dist_ens_samples() const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.distribution.ens_mwh);
    return v;
}

std::vector<double> ResultSet::mg_ens_samples() const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.microgrid.ens_mwh);
    return v;
}

SimulationContext::SimulationContext(RadialNetwork net, ScenarioConfig cfg)
    : net_(std::move(net)), cfg_(std::move(cfg)) {
    // Sensitivity overrides act on this run's private copy of the network.
    if (cfg_.failure_rate_override_per_km)
        for (auto& l : net_.lines)
            if (l.failure_rate_per_km > 0.0) l.failure_rate_per_km = *cfg_.failure_rate_override_per_km;
    if (cfg_.repair_quantile_hours)
        for (auto& l : net_.lines)
            if (l.repair_time_dist.kind == RepairDist::Kind::gamma)
                l.repair_time_dist.gamma = calibrate_gamma(l.repair_time_dist.gamma.shape, *cfg_.repair_quantile_hours,
                                                           cfg_.repair_quantile_prob);
    if (cfg_.sectioning_time_h)
        for (auto& s : net_.switchgear)
            if (s.kind == SwitchKind::circuit_breaker) s.sectioning_time_h = *cfg_.sectioning_time_h;
    net_.build_index();

    profiles_ = generate_profiles(net_, cfg_.profiles, cfg_.horizon_hours, cfg_.master_seed);

    bus_to_point_.assign(net_.buses.size(), -1);
    for (size_t b = 0; b < net_.buses.size(); ++b) {
        const Bus& bus = net_.buses[b];
        if (!bus.load_ref) continue;
        LoadPoint p;
        p.bus = static_cast<int>(b);
        p.ref = *bus.load_ref;
        auto it = cfg_.cens_cost.find(to_string(bus.customer_category));
        p.cost = it == cfg_.cens_cost.end() ? 0.0 : it->second;
        p.customers = bus.customer_count;
        p.in_microgrid = net_.bus_in_microgrid(static_cast<int>(b));
        bus_to_point_[b] = static_cast<int>(load_points_.size());
        load_points_.push_back(std::move(p));
    }

    for (size_t b = 0; b < net_.buses.size(); ++b)
        if (net_.buses[b].generation_ref) gen_units_.push_back({static_cast<int>(b), *net_.buses[b].generation_ref});

    connection_line_ = net_.connection_line ? net_.line_index(*net_.connection_line) : -1;
    for (size_t s = 0; s < net_.switchgear.size(); ++s) {
        if (net_.switchgear[s].kind != SwitchKind::circuit_breaker) continue;
        int host = net_.line_index(net_.switchgear[s].host_line);
        if (host == connection_line_) {
            mg_breaker_ = static_cast<int>(s);
        } else if (feeder_breaker_ < 0) {
            feeder_breaker_ = static_cast<int>(s);
            feeder_breaker_line_ = host;
            feeder_sectioning_h_ = net_.switchgear[s].sectioning_time_h;
        }
    }
    battery_bus_ = net_.battery_bus ? net_.bus_index(*net_.battery_bus) : -1;

    for (const auto& p : load_points_)
        if (p.in_microgrid)
            for (int t = 0; t < cfg_.horizon_hours; ++t)
                peak_mg_load_mw_ = std::max(peak_mg_load_mw_, profiles_.load_p(p.ref, t));
    budget_ = support_budget(cfg_.microgrid_mode, cfg_.battery, peak_mg_load_mw_, cfg_.reserve_hours);

    for (const auto& f : cfg_.forced_failures) forced_by_hour_[f.hour].push_back(f);
    fail_prob_ = failure_probabilities(net_, cfg_.step_hours);
}

// Mutable state and logic for one Monte Carlo iteration (one simulated year).
struct IterationRunner {
    const SimulationContext& ctx;

    ComponentState cs;
    std::vector<bool> open_switchgear;
    bool feeder_open = false;
    double feeder_sectioning_h = 0.0;
    ControllerState controller;
    bool event_active = false;
    bool any_recovered = false;
    std::vector<bool> interrupted;
    std::vector<LoadPointStats> points;
    std::mt19937_64 rng_failures;
    std::mt19937_64 rng_soc;
    IterationResult result;

    struct GenRef {
        int kind = 0;  // 0 renewable, 1 slack, 2 battery
        int bus = -1;
    };

    IterationRunner(const SimulationContext& context, int iteration) : ctx(context) {
        const auto& net = ctx.net_;
        cs.reset(net.lines.size());
        cs.battery.soc_mwh = ctx.cfg_.battery.capacity_mwh;
        open_switchgear.assign(net.switchgear.size(), false);
        interrupted.assign(ctx.load_points_.size(), false);
        points.assign(ctx.load_points_.size(), LoadPointStats{});
        for (size_t i = 0; i < ctx.load_points_.size(); ++i) points[i].customers = ctx.load_points_[i].customers;
        rng_failures = make_engine(ctx.cfg_.master_seed, static_cast<std::uint64_t>(iteration), stream_failures);
        rng_soc = make_engine(ctx.cfg_.master_seed, static_cast<std::uint64_t>(iteration), stream_battery_soc);
        result.iteration = iteration;
        result.has_microgrid = !net.microgrid_buses.empty();
    }

    // Faults within reach of the feeder breaker: every line outside the
    // microgrid plus the line tying the microgrid on.
    bool feeder_scope(int line) const {
        return line == ctx.connection_line_ || !ctx.net_.line_in_microgrid(line);
    }

    bool any_failed_in_feeder_scope() const {
        for (size_t l = 0; l < cs.failed.size(); ++l)
            if (cs.failed[l] && feeder_scope(static_cast<int>(l))) return true;
        return false;
    }

    void init_battery_soc() {
        BatteryInitPolicy policy = ctx.cfg_.battery_initial;
        if (policy == BatteryInitPolicy::auto_mode)
            policy = ctx.cfg_.microgrid_mode == ControllerMode::limited_support ? BatteryInitPolicy::full
                                                                               : BatteryInitPolicy::uniform;
        const auto& bat = ctx.cfg_.battery;
        if (policy == BatteryInitPolicy::full) {
            cs.battery.soc_mwh = bat.capacity_mwh;
        } else {
            std::uniform_real_distribution<double> unif(bat.min_soc * bat.capacity_mwh, bat.capacity_mwh);
            cs.battery.soc_mwh = unif(rng_soc);
        }
    }

    void mark_point(int point, double shed_mw, double dt) {
        auto& lp = points[static_cast<size_t>(point)];
        if (shed_mw > kShedTol) {
            if (!interrupted[static_cast<size_t>(point)]) {
                interrupted[static_cast<size_t>(point)] = true;
                lp.interruptions += 1.0;
            }
            lp.hours += dt;
            lp.ens_mwh += shed_mw * dt;
            lp.cens += shed_mw * dt * ctx.load_points_[static_cast<size_t>(point)].cost;
        } else {
            interrupted[static_cast<size_t>(point)] = false;
        }
    }

    // Single-source tree feasibility: every line carries exactly the demand
    // hanging below it, so capacity checks need no optimization.
    bool tree_flows_ok(const SubSystem& sub, int t) const {
        const auto& net = ctx.net_;
        std::vector<char> in_sub(net.lines.size(), 0);
        for (int l : sub.line_idx) in_sub[static_cast<size_t>(l)] = 1;
        std::vector<int> order;
        std::vector<int> parent_line(net.buses.size(), -1), parent_bus(net.buses.size(), -1);
        std::vector<bool> seen(net.buses.size(), false);
        int root = net.slack_index();
        order.push_back(root);
        seen[static_cast<size_t>(root)] = true;
        for (size_t qi = 0; qi < order.size(); ++qi)
            for (auto [line, other] : net.adjacent(order[qi])) {
                if (!in_sub[static_cast<size_t>(line)] || seen[static_cast<size_t>(other)]) continue;
                seen[static_cast<size_t>(other)] = true;
                parent_line[static_cast<size_t>(other)] = line;
                parent_bus[static_cast<size_t>(other)] = order[qi];
                order.push_back(other);
            }
        std::vector<double> below(net.buses.size(), 0.0);
        for (size_t qi = order.size(); qi-- > 0;) {
            int b = order[qi];
            int point = ctx.bus_to_point_[static_cast<size_t>(b)];
            if (point >= 0)
                below[static_cast<size_t>(b)] +=
                    ctx.profiles_.load_p(ctx.load_points_[static_cast<size_t>(point)].ref, t);
            int pl = parent_line[static_cast<size_t>(b)];
            if (pl >= 0) {
                if (below[static_cast<size_t>(b)] > ctx.net_.lines[static_cast<size_t>(pl)].capacity_mw) return false;
                below[static_cast<size_t>(parent_bus[static_cast<size_t>(b)])] += below[static_cast<size_t>(b)];
            }
        }
        return true;
    }

    // Voltage/residual verification of the operating point the dispatch chose.
    void run_flow_bookkeeping(const SubSystem& sub, const std::vector<int>& point_of_load,
                              const std::vector<double>& served_p_mw, const std::vector<GenRef>& gen_refs,
                              const std::vector<double>& gen_mw, int t) {
        const auto& net = ctx.net_;
        if (sub.line_idx.empty()) return;

        Injections inj;
        inj.p_pu.assign(net.buses.size(), 0.0);
        inj.q_pu.assign(net.buses.size(), 0.0);
        const double s_base = net.meta.s_base_mva;
        for (size_t k = 0; k < point_of_load.size(); ++k) {
            const auto& lp = ctx.load_points_[static_cast<size_t>(point_of_load[k])];
            double demand = ctx.profiles_.load_p(lp.ref, t);
            double frac = demand > kShedTol ? served_p_mw[k] / demand : 0.0;
            inj.p_pu[static_cast<size_t>(lp.bus)] += served_p_mw[k] / s_base;
            inj.q_pu[static_cast<size_t>(lp.bus)] += frac * ctx.profiles_.load_q(lp.ref, t) / s_base;
        }
        int best_gen_bus = -1;
        double best_gen = -1.0;
        for (size_t g = 0; g < gen_refs.size(); ++g) {
            if (gen_refs[g].kind == 1) continue;  // the slack supplies the residual implicitly
            inj.p_pu[static_cast<size_t>(gen_refs[g].bus)] -= gen_mw[g] / s_base;
            if (gen_mw[g] > best_gen) {
                best_gen = gen_mw[g];
                best_gen_bus = gen_refs[g].bus;
            }
        }

        int root;
        if (sub.contains_slack)
            root = net.slack_index();
        else if (ctx.battery_bus_ >= 0 && std::binary_search(sub.bus_idx.begin(), sub.bus_idx.end(), ctx.battery_bus_))
            root = ctx.battery_bus_;
        else
            root = best_gen_bus;
        if (root < 0) return;
        // The root acts as the reference and supplies the network imbalance,
        // so its own source output must not stay in the fixed injections.
        if (!sub.contains_slack)
            for (size_t g = 0; g < gen_refs.size(); ++g)
                if (gen_refs[g].bus == root) inj.p_pu[static_cast<size_t>(root)] += gen_mw[g] / s_base;

        FlowSolution flow = solve_fbs(net, sub, inj, root);
        if (!flow.converged) result.fbs_not_converged += 1;
    }

    // Serves one energized or dead sub-system at hour t and records shedding.
    void serve_sub(const SubSystem& sub, int t, double dt) {
        const auto& net = ctx.net_;
        const auto& prof = ctx.profiles_;

        bool battery_here = ctx.battery_bus_ >= 0 &&
                            std::binary_search(sub.bus_idx.begin(), sub.bus_idx.end(), ctx.battery_bus_);
        if (!sub.contains_slack && !sub.has_generation && !battery_here) {
            // Dead island: everything is shed.
            for (int b : sub.bus_idx) {
                int point = ctx.bus_to_point_[static_cast<size_t>(b)];
                if (point >= 0)
                    mark_point(point, prof.load_p(ctx.load_points_[static_cast<size_t>(point)].ref, t), dt);
            }
            return;
        }

        // Dense node numbering local to this sub-system (sorted bus order).
        std::vector<int> local(net.buses.size(), -1);
        for (size_t i = 0; i < sub.bus_idx.size(); ++i)
            local[static_cast<size_t>(sub.bus_idx[i])] = static_cast<int>(i);

        ShedProblem prob;
        prob.node_count = static_cast<int>(sub.bus_idx.size());
        std::vector<int> point_of_load;
        double total_demand = 0.0;
        for (int b : sub.bus_idx) {
            int point = ctx.bus_to_point_[static_cast<size_t>(b)];
            if (point < 0) continue;
            double d = prof.load_p(ctx.load_points_[static_cast<size_t>(point)].ref, t);
            if (d <= kShedTol) {
                mark_point(point, 0.0, dt);
                continue;
            }
            double shed_cost = ctx.load_points_[static_cast<size_t>(point)].cost;
            if (!sub.contains_slack && ctx.load_points_[static_cast<size_t>(point)].in_microgrid)
                shed_cost += kMicrogridPriorityCost;
            prob.loads.push_back({local[static_cast<size_t>(b)], d, shed_cost});
            point_of_load.push_back(point);
            total_demand += d;
        }

        std::vector<GenRef> gen_refs;
        double renewable_avail_mg = 0.0;
        for (const auto& unit : ctx.gen_units_) {
            if (local[static_cast<size_t>(unit.bus)] < 0) continue;
            double avail = std::max(0.0, prof.gen_p(unit.ref, t));
            prob.gens.push_back({local[static_cast<size_t>(unit.bus)], 0.0, avail, 0.0});
            gen_refs.push_back({0, unit.bus});
            if (net.bus_in_microgrid(unit.bus)) renewable_avail_mg += avail;
        }
        if (sub.contains_slack) {
            prob.gens.push_back(
                {local[static_cast<size_t>(net.slack_index())], 0.0, ctx.cfg_.feeder_capacity_mw, kSlackCost});
            gen_refs.push_back({1, net.slack_index()});
        }
        if (battery_here) {
            double battery_max = battery_available_mw(ctx.cfg_.battery, cs.battery, dt, ctx.budget_.own_floor_mwh);
            if (battery_max > 0.0) {
                prob.gens.push_back({local[static_cast<size_t>(ctx.battery_bus_)], 0.0, battery_max, kBatteryCost});
                gen_refs.push_back({2, ctx.battery_bus_});
            }
        }

        if (prob.loads.empty()) {
            // Nothing to serve; an islanded battery still banks any surplus.
            if (battery_here && !sub.contains_slack && renewable_avail_mg > kShedTol)
                battery_dispatch(ctx.cfg_.battery, cs.battery, -renewable_avail_mg, dt, 0.0);
            return;
        }

        // Fast path: the slack alone feeds an uncongested radial sub-system.
        if (!battery_here && sub.contains_slack && gen_refs.size() == 1 &&
            total_demand <= ctx.cfg_.feeder_capacity_mw && tree_flows_ok(sub, t)) {
            std::vector<double> served(point_of_load.size());
            for (size_t k = 0; k < point_of_load.size(); ++k) {
                mark_point(point_of_load[k], 0.0, dt);
                served[k] = prob.loads[k].demand_mw;
            }
            std::vector<double> gen_out{0.0};  // slack output is implicit in the sweep
            run_flow_bookkeeping(sub, point_of_load, served, gen_refs, gen_out, t);
            return;
        }

        for (int l : sub.line_idx) {
            const Line& ln = net.lines[static_cast<size_t>(l)];
            double fwd = ln.capacity_mw, rev = ln.capacity_mw;
            if (l == ctx.connection_line_ && battery_here) {
                // Power leaving the microgrid is capped at renewables plus
                // whatever the battery may release above its export reserve.
                double bat_export =
                    battery_available_mw(ctx.cfg_.battery, cs.battery, dt, ctx.budget_.export_floor_mwh);
                double allow = std::min(ln.capacity_mw, renewable_avail_mg + std::max(0.0, bat_export));
                if (net.bus_in_microgrid(net.bus_index(ln.from_bus)))
                    fwd = allow;
                else
                    rev = allow;
            }
            prob.lines.push_back({local[static_cast<size_t>(net.bus_index(ln.from_bus))],
                                  local[static_cast<size_t>(net.bus_index(ln.to_bus))], fwd, rev});
        }

        ShedSolution sol;
        try {
            sol = solve_shed(prob);
        } catch (const std::exception&) {
            result.lp_errors += 1;
            for (size_t k = 0; k < point_of_load.size(); ++k)
                mark_point(point_of_load[k], prob.loads[k].demand_mw, dt);
            return;
        }
        if (!sol.feasible) result.lp_infeasible += 1;

        std::vector<double> served(point_of_load.size());
        for (size_t k = 0; k < point_of_load.size(); ++k) {
            mark_point(point_of_load[k], sol.shed_mw[k], dt);
            served[k] = prob.loads[k].demand_mw - sol.shed_mw[k];
        }

        // Settle the battery: discharge what the dispatch used, or bank any
        // renewable surplus while running as an island.
        if (battery_here) {
            double battery_out = 0.0, renewable_used = 0.0, renewable_avail = 0.0;
            for (size_t g = 0; g < gen_refs.size(); ++g) {
                if (gen_refs[g].kind == 2) battery_out = sol.gen_mw[g];
                if (gen_refs[g].kind == 0) {
                    renewable_used += sol.gen_mw[g];
                    renewable_avail += prob.gens[g].max_mw;
                }
            }
            if (battery_out > kShedTol) {
                battery_dispatch(ctx.cfg_.battery, cs.battery, battery_out, dt, ctx.budget_.own_floor_mwh);
            } else if (!sub.contains_slack) {
                double surplus = renewable_avail - renewable_used;
                if (surplus > kShedTol) battery_dispatch(ctx.cfg_.battery, cs.battery, -surplus, dt, 0.0);
            }
        }

        run_flow_bookkeeping(sub, point_of_load, served, gen_refs, sol.gen_mw, t);
    }

    void run_increment(int t) {
        const auto& net = ctx.net_;
        const double dt = ctx.cfg_.step_hours;

        auto fresh = draw_failures(net, cs, rng_failures, dt, ctx.fail_prob_);
        auto forced = ctx.forced_by_hour_.find(t);
        if (forced != ctx.forced_by_hour_.end())
            for (const auto& f : forced->second) {
                int l = net.line_index(f.line);
                if (!cs.failed[static_cast<size_t>(l)]) {
                    cs.failed[static_cast<size_t>(l)] = true;
                    cs.remaining_repair_h[static_cast<size_t>(l)] = f.repair_hours;
                    fresh.push_back(l);
                }
            }

        bool new_outage = !fresh.empty();
        bool new_feeder_outage = false;
        for (int l : fresh)
            if (feeder_scope(l)) new_feeder_outage = true;

        if (new_outage && !event_active) {
            event_active = true;
            init_battery_soc();
        }

        // Feeder breaker: trips on any fault in its scope, recloses once the
        // sectioning work has isolated the faulted lines (or they recovered).
        if (ctx.feeder_breaker_ >= 0) {
            if (new_feeder_outage) {
                feeder_open = true;
                feeder_sectioning_h = ctx.feeder_sectioning_h_;
            } else if (feeder_open && (feeder_sectioning_h <= 0.0 || !any_failed_in_feeder_scope())) {
                for (size_t l = 0; l < net.lines.size(); ++l)
                    if (cs.failed[l] && feeder_scope(static_cast<int>(l))) cs.isolated[l] = true;
                feeder_open = false;
            }
        }

        if (ctx.mg_breaker_ >= 0) {
            double sect = net.switchgear[static_cast<size_t>(ctx.mg_breaker_)].sectioning_time_h;
            controller = controller_step(ctx.cfg_.microgrid_mode, controller, net, cs, new_outage, any_recovered, sect);
        }
        any_recovered = false;

        bool abnormal = cs.any_failed() || feeder_open || controller.breaker_open;
        if (abnormal) {
            std::fill(open_switchgear.begin(), open_switchgear.end(), false);
            if (ctx.feeder_breaker_ >= 0 && feeder_open)
                open_switchgear[static_cast<size_t>(ctx.feeder_breaker_)] = true;
            if (ctx.mg_breaker_ >= 0 && controller.breaker_open)
                open_switchgear[static_cast<size_t>(ctx.mg_breaker_)] = true;
            for (size_t l = 0; l < net.lines.size(); ++l)
                if (cs.isolated[l])
                    for (int s : net.switches_on_line(static_cast<int>(l)))
                        if (net.switchgear[static_cast<size_t>(s)].kind == SwitchKind::disconnector)
                            open_switchgear[static_cast<size_t>(s)] = true;

            auto subs = net.find_sub_systems(cs.failed, open_switchgear);
            controller.islanded_with.clear();
            for (const auto& sub : subs) {
                if (!sub.contains_slack && ctx.battery_bus_ >= 0 &&
                    std::binary_search(sub.bus_idx.begin(), sub.bus_idx.end(), ctx.battery_bus_))
                    for (int b : sub.bus_idx)
                        if (!net.bus_in_microgrid(b)) controller.islanded_with.push_back(b);
                serve_sub(sub, t, dt);
            }
        } else if (event_active) {
            for (size_t p = 0; p < interrupted.size(); ++p) interrupted[p] = false;
            event_active = false;
        }

        // End of increment: countdowns run and finished repairs reconnect.
        if (feeder_open) feeder_sectioning_h -= dt;
        if (controller.breaker_open) controller.sectioning_remaining_h -= dt;
        for (size_t l = 0; l < net.lines.size(); ++l) {
            if (!cs.failed[l]) continue;
            cs.remaining_repair_h[l] -= dt;
            if (cs.remaining_repair_h[l] <= 0.0) {
                cs.failed[l] = false;
                cs.isolated[l] = false;
                cs.remaining_repair_h[l] = 0.0;
                any_recovered = true;
            }
        }
    }

    IterationResult finish() {
        std::vector<LoadPointStats> dist, mg;
        for (size_t i = 0; i < ctx.load_points_.size(); ++i) {
            if (ctx.load_points_[i].in_microgrid)
                mg.push_back(points[i]);
            else
                dist.push_back(points[i]);
        }
        result.distribution = compute_indices(dist);
        result.microgrid = compute_indices(mg);
        return result;
    }
};

IterationResult SimulationContext::run_iteration(int iteration) const {
    IterationRunner runner(*this, iteration);
    for (int t = 0; t < cfg_.horizon_hours; ++t) runner.run_increment(t);
    return runner.finish();
}

ResultSet run_simulation(const RadialNetwork& net, const ScenarioConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    SimulationContext ctx(net, cfg);

    ResultSet out;
    out.master_seed = cfg.master_seed;
    out.rows.resize(static_cast<size_t>(std::max(0, cfg.iterations)));

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, std::max(1, cfg.iterations)));

    if (workers <= 1) {
        for (int i = 0; i < cfg.iterations; ++i) out.rows[static_cast<size_t>(i)] = ctx.run_iteration(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&ctx, &out, &next, &errors, w, total = cfg.iterations]() {
                try {
                    for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                        out.rows[static_cast<size_t>(i)] = ctx.run_iteration(i);
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    out.running_mean_dist_ens.resize(out.rows.size());
    out.running_mean_mg_ens.resize(out.rows.size());
    double acc_d = 0.0, acc_m = 0.0;
    for (size_t i = 0; i < out.rows.size(); ++i) {
        acc_d += out.rows[i].distribution.ens_mwh;
        acc_m += out.rows[i].microgrid.ens_mwh;
        out.running_mean_dist_ens[i] = acc_d / static_cast<double>(i + 1);
        out.running_mean_mg_ens[i] = acc_m / static_cast<double>(i + 1);
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace gridrel
