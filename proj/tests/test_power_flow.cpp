#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "flow_oracle.hpp"
#include "gridrel/datasets.hpp"
#include "gridrel/network.hpp"
#include "gridrel/power_flow.hpp"
#include "gridrel/profiles.hpp"
#include "helpers.hpp"

using namespace gridrel;

namespace {

SubSystem intact_sub(const RadialNetwork& net) {
    std::vector<bool> no_failures(net.lines.size(), false);
    std::vector<bool> all_closed(net.switchgear.size(), false);
    auto subs = net.find_sub_systems(no_failures, all_closed);
    REQUIRE(subs.size() == 1);
    return subs[0];
}

Injections zero_injections(const RadialNetwork& net) {
    Injections inj;
    inj.p_pu.assign(net.buses.size(), 0.0);
    inj.q_pu.assign(net.buses.size(), 0.0);
    return inj;
}

// Peak-demand injections built through the profile generator with flat
// shapes, so hour 0 carries exactly the configured peaks.
Injections peak_injections(const RadialNetwork& net, bool include_generation) {
    ScenarioConfig cfg = default_config("ieee33");
    cfg.profiles.flat_loads = true;
    ProfileSet profs = generate_profiles(net, cfg.profiles, 1, 99);
    Injections inj = zero_injections(net);
    double s_base = net.meta.s_base_mva;
    for (size_t b = 0; b < net.buses.size(); ++b) {
        const Bus& bus = net.buses[b];
        if (bus.load_ref) {
            inj.p_pu[b] += profs.load_p(*bus.load_ref, 0) / s_base;
            inj.q_pu[b] += profs.load_q(*bus.load_ref, 0) / s_base;
        }
        if (include_generation && bus.generation_ref) inj.p_pu[b] -= profs.gen_p(*bus.generation_ref, 0) / s_base;
    }
    return inj;
}

}  // namespace

TEST_CASE("zero injections give a flat voltage profile") {
    RadialNetwork net = make_network("ieee33");
    SubSystem sub = intact_sub(net);
    FlowSolution sol = solve_fbs(net, sub, zero_injections(net), net.slack_index());
    CHECK(sol.converged);
    for (int b : sub.bus_idx) {
        CHECK(sol.v_pu[static_cast<size_t>(b)] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sol.delta_rad[static_cast<size_t>(b)] == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (int l : sub.line_idx) CHECK(std::abs(sol.line_p_pu[static_cast<size_t>(l)]) < 1e-12);
    CHECK(sol.loss_p_pu < 1e-12);
    CHECK(sol.balance_residual_pu < 1e-12);
}

TEST_CASE("two-bus feeder matches the closed-form voltage") {
    // One line, R = X = 0.1 pu, load 0.1 + j0.05 pu at the far end. The exact
    // receiving-end voltage solves
    //   V2^4 + V2^2 * (2(PR+QX) - V1^2) + (P^2+Q^2)(R^2+X^2) = 0.
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 1.0);
    net.lines[0].resistance = 0.1;
    net.lines[0].reactance = 0.1;
    net.lines[1].resistance = 0.1;
    net.lines[1].reactance = 0.1;
    net.build_index();

    Injections inj = zero_injections(net);
    inj.p_pu[1] = 0.1;
    inj.q_pu[1] = 0.05;
    // B3 unloaded: its voltage must equal B2's (no current on L2).

    SubSystem sub = intact_sub(net);
    FlowSolution sol = solve_fbs(net, sub, inj, 0, 1.0, FbsOptions{1e-10, 200});
    REQUIRE(sol.converged);

    const double p = 0.1, q = 0.05, r = 0.1, x = 0.1;
    double a = 1.0 - 2.0 * (p * r + q * x);
    double disc = a * a - 4.0 * (p * p + q * q) * (r * r + x * x);
    double v2_sq = (a + std::sqrt(disc)) / 2.0;
    double v2 = std::sqrt(v2_sq);

    CHECK(sol.v_pu[1] == doctest::Approx(v2).epsilon(1e-9));
    CHECK(sol.v_pu[2] == doctest::Approx(v2).epsilon(1e-9));
    CHECK(sol.line_p_pu[0] == doctest::Approx(p + r * (p * p + q * q) / v2_sq).epsilon(1e-9));
    CHECK(sol.balance_residual_pu < 1e-8);

    // Exact angle from the complex drop: V2 = V1 - Z * conj(S/V2).
    std::complex<double> v2c = std::polar(sol.v_pu[1], sol.delta_rad[1]);
    std::complex<double> expect = std::complex<double>(1.0, 0.0) -
                                  std::complex<double>(r, x) * std::conj(std::complex<double>(p, q) / v2c);
    CHECK(std::abs(v2c - expect) < 1e-9);
}

TEST_CASE("33-bus feeder at original loading agrees with the ladder oracle") {
    RadialNetwork net = make_network("ieee33");
    SubSystem sub = intact_sub(net);
    Injections inj = peak_injections(net, false);

    // Sanity on the data itself: canonical total demand.
    double p_tot = 0.0, q_tot = 0.0;
    for (size_t b = 0; b < net.buses.size(); ++b) {
        p_tot += inj.p_pu[b] * net.meta.s_base_mva;
        q_tot += inj.q_pu[b] * net.meta.s_base_mva;
    }
    CHECK(p_tot == doctest::Approx(3.715).epsilon(1e-9));
    CHECK(q_tot == doctest::Approx(2.3).epsilon(1e-9));

    FlowSolution sol = solve_fbs(net, sub, inj, net.slack_index());
    REQUIRE(sol.converged);
    auto oracle = testutil::ladder_flow(net, sub, inj, net.slack_index());
    REQUIRE(oracle.converged);

    double worst_v = 0.0, worst_ang = 0.0;
    for (int b : sub.bus_idx) {
        double v_ref = std::abs(oracle.v.at(b));
        double a_ref = std::arg(oracle.v.at(b));
        worst_v = std::max(worst_v, std::abs(sol.v_pu[static_cast<size_t>(b)] - v_ref));
        worst_ang = std::max(worst_ang, std::abs(sol.delta_rad[static_cast<size_t>(b)] - a_ref));
    }
    CHECK(worst_v < 1e-6);
    CHECK(worst_ang < 1e-6);
    CHECK(sol.loss_p_pu == doctest::Approx(oracle.loss_p).epsilon(1e-6));
    CHECK(sol.loss_q_pu == doctest::Approx(oracle.loss_q).epsilon(1e-6));
    CHECK(sol.root_injection_p_pu == doctest::Approx(oracle.root_injection.real()).epsilon(1e-6));
    CHECK(sol.balance_residual_pu < 1e-8);

    // Physics sanity: all losses nonnegative, voltages sag below the root,
    // and the known minimum sits near 0.9 pu at this loading.
    double v_min = 2.0;
    for (int b : sub.bus_idx) v_min = std::min(v_min, sol.v_pu[static_cast<size_t>(b)]);
    CHECK(v_min > 0.88);
    CHECK(v_min < 0.96);
    CHECK(sol.loss_p_pu > 0.0);
    CHECK(sol.loss_q_pu > 0.0);
    for (int l : sub.line_idx) {
        int f = net.bus_index(net.lines[static_cast<size_t>(l)].from_bus);
        CHECK(sol.line_p_pu[static_cast<size_t>(l)] ==
              doctest::Approx(oracle.line_send.at(l).real()).epsilon(1e-6).scale(1.0));
        (void)f;
    }
}

TEST_CASE("every sub-system after a fault split is solved to the oracle") {
    RadialNetwork net = make_network("ieee33_mg");
    // Open the microgrid connection and fail one mid-feeder line with its
    // disconnectors open: three live fragments remain.
    std::vector<bool> failed(net.lines.size(), false);
    std::vector<bool> open_sw(net.switchgear.size(), false);
    int l10 = net.line_index("L10");
    failed[static_cast<size_t>(l10)] = true;
    for (int s : net.switches_on_line(l10)) open_sw[static_cast<size_t>(s)] = true;
    int cl = net.line_index(*net.connection_line);
    for (int s : net.switches_on_line(cl)) open_sw[static_cast<size_t>(s)] = true;

    auto subs = net.find_sub_systems(failed, open_sw);
    REQUIRE(subs.size() == 3);

    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.profiles.flat_loads = true;
    ProfileSet profs = generate_profiles(net, cfg.profiles, 1, 5);
    Injections inj;
    inj.p_pu.assign(net.buses.size(), 0.0);
    inj.q_pu.assign(net.buses.size(), 0.0);
    for (size_t b = 0; b < net.buses.size(); ++b) {
        if (net.buses[b].load_ref) {
            inj.p_pu[b] = profs.load_p(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
            inj.q_pu[b] = profs.load_q(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
        }
    }

    for (const auto& sub : subs) {
        int root = sub.contains_slack ? net.slack_index() : sub.bus_idx.front();
        FlowSolution sol = solve_fbs(net, sub, inj, root);
        REQUIRE(sol.converged);
        CHECK(sol.balance_residual_pu < 1e-8);
        auto oracle = testutil::ladder_flow(net, sub, inj, root);
        REQUIRE(oracle.converged);
        for (int b : sub.bus_idx)
            CHECK(sol.v_pu[static_cast<size_t>(b)] == doctest::Approx(std::abs(oracle.v.at(b))).epsilon(1e-7));
        // Buses outside this fragment stay at zero.
        for (size_t b = 0; b < net.buses.size(); ++b) {
            if (std::find(sub.bus_idx.begin(), sub.bus_idx.end(), static_cast<int>(b)) == sub.bus_idx.end())
                CHECK(sol.v_pu[b] == 0.0);
        }
    }
}

TEST_CASE("solution is invariant under input reordering") {
    RadialNetwork base = make_network("ieee33");
    Injections inj_base = peak_injections(base, false);
    FlowSolution ref = solve_fbs(base, intact_sub(base), inj_base, base.slack_index());

    RadialNetwork shuffled = base;
    std::mt19937 rng(77);
    std::shuffle(shuffled.buses.begin(), shuffled.buses.end(), rng);
    std::shuffle(shuffled.lines.begin(), shuffled.lines.end(), rng);
    shuffled.build_index();

    Injections inj;
    inj.p_pu.assign(shuffled.buses.size(), 0.0);
    inj.q_pu.assign(shuffled.buses.size(), 0.0);
    for (size_t b = 0; b < base.buses.size(); ++b) {
        int nb = shuffled.bus_index(base.buses[b].id);
        inj.p_pu[static_cast<size_t>(nb)] = inj_base.p_pu[b];
        inj.q_pu[static_cast<size_t>(nb)] = inj_base.q_pu[b];
    }
    FlowSolution got = solve_fbs(shuffled, intact_sub(shuffled), inj, shuffled.slack_index());
    REQUIRE(got.converged);
    for (size_t b = 0; b < base.buses.size(); ++b) {
        int nb = shuffled.bus_index(base.buses[b].id);
        CHECK(got.v_pu[static_cast<size_t>(nb)] == doctest::Approx(ref.v_pu[b]).epsilon(1e-12));
        CHECK(got.delta_rad[static_cast<size_t>(nb)] == doctest::Approx(ref.delta_rad[b]).epsilon(1e-12));
    }
    CHECK(got.loss_p_pu == doctest::Approx(ref.loss_p_pu).epsilon(1e-12));
}

TEST_CASE("malformed sub-systems are rejected") {
    RadialNetwork net = make_network("ieee33");
    SubSystem sub = intact_sub(net);
    Injections inj = zero_injections(net);

    SubSystem missing_line = sub;
    missing_line.line_idx.pop_back();  // line count no longer bus count - 1
    CHECK_THROWS_AS(solve_fbs(net, missing_line, inj, net.slack_index()), std::invalid_argument);

    SubSystem detached = sub;
    // Remove a middle line but keep both halves' buses: right count, not a tree.
    detached.line_idx.erase(std::find(detached.line_idx.begin(), detached.line_idx.end(), net.line_index("L5")));
    detached.bus_idx.erase(std::find(detached.bus_idx.begin(), detached.bus_idx.end(), net.bus_index("B33")));
    CHECK_THROWS_AS(solve_fbs(net, detached, inj, net.slack_index()), std::invalid_argument);

    CHECK_THROWS_AS(solve_fbs(net, sub, inj, -1), std::invalid_argument);
}

TEST_CASE("an unservable loading reports failure instead of a bogus answer") {
    RadialNetwork net = make_network("ieee33");
    SubSystem sub = intact_sub(net);
    Injections inj = zero_injections(net);
    // ~200 MW at the feeder end: far beyond the maximum power transfer.
    inj.p_pu[static_cast<size_t>(net.bus_index("B18"))] = 20.0;
    FlowSolution sol = solve_fbs(net, sub, inj, net.slack_index());
    CHECK_FALSE(sol.converged);
}

TEST_CASE("generation offsets demand in the solved flows") {
    RadialNetwork net = make_network("ieee33_mg");
    SubSystem sub = intact_sub(net);
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.profiles.flat_loads = true;
    ProfileSet profs = generate_profiles(net, cfg.profiles, 1, 11);

    Injections load_only;
    load_only.p_pu.assign(net.buses.size(), 0.0);
    load_only.q_pu.assign(net.buses.size(), 0.0);
    for (size_t b = 0; b < net.buses.size(); ++b) {
        if (net.buses[b].load_ref) {
            load_only.p_pu[b] = profs.load_p(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
            load_only.q_pu[b] = profs.load_q(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
        }
    }
    Injections with_gen = load_only;
    bool any_gen = false;
    for (size_t b = 0; b < net.buses.size(); ++b) {
        if (net.buses[b].generation_ref) {
            double g = profs.gen_p(*net.buses[b].generation_ref, 0) / net.meta.s_base_mva;
            if (g > 0.0) any_gen = true;
            with_gen.p_pu[b] -= g;
        }
    }
    REQUIRE(any_gen);

    FlowSolution a = solve_fbs(net, sub, load_only, net.slack_index());
    FlowSolution g = solve_fbs(net, sub, with_gen, net.slack_index());
    REQUIRE(a.converged);
    REQUIRE(g.converged);
    CHECK(g.root_injection_p_pu < a.root_injection_p_pu);
    CHECK(g.balance_residual_pu < 1e-8);
    auto oracle = testutil::ladder_flow(net, sub, with_gen, net.slack_index());
    for (int b : sub.bus_idx)
        CHECK(g.v_pu[static_cast<size_t>(b)] == doctest::Approx(std::abs(oracle.v.at(b))).epsilon(1e-7));
}
