#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridrel/datasets.hpp"
#include "gridrel/engine.hpp"
#include "helpers.hpp"

using namespace gridrel;

namespace {

bool same_report(const IndexReport& a, const IndexReport& b) {
    return a.lambda_s == b.lambda_s && a.u_s_h == b.u_s_h && a.r_s_h == b.r_s_h && a.ens_mwh == b.ens_mwh &&
           a.cens == b.cens && a.saifi == b.saifi && a.saidi_h == b.saidi_h && a.caidi_h == b.caidi_h;
}

bool same_row(const IterationResult& a, const IterationResult& b) {
    return a.iteration == b.iteration && a.has_microgrid == b.has_microgrid &&
           same_report(a.distribution, b.distribution) && same_report(a.microgrid, b.microgrid) &&
           a.fbs_not_converged == b.fbs_not_converged && a.lp_infeasible == b.lp_infeasible &&
           a.lp_errors == b.lp_errors;
}

}  // namespace

TEST_CASE("a fault-free year accumulates nothing") {
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 3.0);
    ScenarioConfig cfg = testutil::three_bus_config(1.0, 1.0);
    cfg.iterations = 3;
    ResultSet rs = run_simulation(net, cfg);
    REQUIRE(rs.rows.size() == 3);
    for (size_t i = 0; i < rs.rows.size(); ++i) {
        CHECK(rs.rows[i].iteration == static_cast<int>(i));
        CHECK_FALSE(rs.rows[i].has_microgrid);
        CHECK(rs.rows[i].distribution.ens_mwh == 0.0);
        CHECK(rs.rows[i].distribution.lambda_s == 0.0);
        CHECK(rs.rows[i].microgrid.ens_mwh == 0.0);
    }
    CHECK(rs.mean_dist_ens() == 0.0);
    for (double m : rs.running_mean_dist_ens) CHECK(m == 0.0);
}

TEST_CASE("zero iterations produce an empty but well-formed result") {
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 3.0);
    ScenarioConfig cfg = testutil::three_bus_config(1.0, 1.0);
    cfg.iterations = 0;
    ResultSet rs = run_simulation(net, cfg);
    CHECK(rs.rows.empty());
    CHECK(rs.mean_dist_ens() == 0.0);
    CHECK(rs.dist_ens_samples().empty());
}

TEST_CASE("one isolatable fault follows the sectioning-then-repair timeline") {
    // L2 (feeding only B3) fails at hour 100 for exactly 3 h. Sectioning takes
    // 1 h, so B2 is dark for hour 100 alone while B3 stays dark for all three:
    //   hour 100: breaker open, B2 and B3 both unserved;
    //   hours 101, 102: L2 isolated, breaker closed, only B3 unserved;
    //   hour 103: repair done, everything back to normal.
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 3.0);
    ScenarioConfig cfg = testutil::three_bus_config(1.0, 1.0);
    cfg.iterations = 1;
    cfg.forced_failures.push_back({"L2", 100, 3.0});
    ResultSet rs = run_simulation(net, cfg);
    REQUIRE(rs.rows.size() == 1);
    const IndexReport& d = rs.rows[0].distribution;
    CHECK(d.lambda_s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.u_s_h == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(d.ens_mwh == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(d.cens == doctest::Approx(40.0).epsilon(1e-12));  // household load at 10 / MWh
    CHECK(d.saifi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.saidi_h == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.caidi_h == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.r_s_h == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rs.rows[0].lp_errors == 0);
    CHECK(rs.rows[0].lp_infeasible == 0);
}

TEST_CASE("a fault on the main line keeps everything dark until repair completes") {
    // L1 fails at hour 200 for 2.5 h; with hourly steps the third increment
    // still sees it failed, so the outage spans three full hours.
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 3.0);
    ScenarioConfig cfg = testutil::three_bus_config(1.0, 1.0);
    cfg.iterations = 1;
    cfg.forced_failures.push_back({"L1", 200, 2.5});
    ResultSet rs = run_simulation(net, cfg);
    const IndexReport& d = rs.rows[0].distribution;
    CHECK(d.lambda_s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.u_s_h == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(d.ens_mwh == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(d.saifi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.saidi_h == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("a congested feeder sheds the overhang during restoration") {
    // B2 demands 1.5 MW but the feeder may import only 1.2 MW. While L2 is
    // isolated (hours 101-102) the dispatch sheds the 0.3 MW overhang; during
    // the breaker hour everything is dark.
    RadialNetwork net = testutil::three_bus_feeder(0.0, 0.0, 3.0);
    ScenarioConfig cfg = testutil::three_bus_config(1.5, 1.0);
    cfg.iterations = 1;
    cfg.feeder_capacity_mw = 1.2;
    cfg.forced_failures.push_back({"L2", 100, 3.0});
    ResultSet rs = run_simulation(net, cfg);
    const IndexReport& d = rs.rows[0].distribution;
    // B2: 1.5 (hour 100) + 0.3 + 0.3; B3: 1.0 * 3.
    CHECK(d.ens_mwh == doctest::Approx(5.1).epsilon(1e-9));
    CHECK(d.lambda_s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.u_s_h == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(rs.rows[0].lp_errors == 0);
    CHECK(rs.rows[0].lp_infeasible == 0);
}

TEST_CASE("a microgrid with a charged battery rides through a connection-line fault") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = 1;
    cfg.horizon_hours = 100;
    cfg.failure_rate_override_per_km = 0.0;  // only the forced fault happens
    cfg.microgrid_mode = ControllerMode::full_support;
    cfg.battery = BatterySpec{10.0, 5.0, 0.95, 0.1};
    cfg.battery_initial = BatteryInitPolicy::full;
    cfg.forced_failures.push_back({"ML1", 50, 5.0});

    SimulationContext ctx(net, cfg);
    IterationResult row = ctx.run_iteration(0);

    REQUIRE(row.has_microgrid);
    CHECK(row.microgrid.ens_mwh == 0.0);
    CHECK(row.microgrid.lambda_s == 0.0);

    // The feeder breaker darkens the whole distribution grid for the fault
    // hour; reclosing restores it while the microgrid stays islanded.
    double expected_ens = 0.0, expected_cens = 0.0;
    for (size_t b = 0; b < net.buses.size(); ++b) {
        if (!net.buses[b].load_ref || net.bus_in_microgrid(static_cast<int>(b))) continue;
        double load = ctx.profiles().load_p(*net.buses[b].load_ref, 50);
        expected_ens += load;
        expected_cens += load * cfg.cens_cost.at(to_string(net.buses[b].customer_category));
    }
    CHECK(row.distribution.ens_mwh == doctest::Approx(expected_ens).epsilon(1e-9));
    CHECK(row.distribution.cens == doctest::Approx(expected_cens).epsilon(1e-9));
    CHECK(row.distribution.saifi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.distribution.saidi_h == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.fbs_not_converged == 0);
    CHECK(row.lp_errors == 0);
    CHECK(row.lp_infeasible == 0);
}

TEST_CASE("battery initialisation policy cannot leak into distribution results") {
    // With export disabled, changing how the battery state of charge is drawn
    // must leave the distribution side bit-identical: it lives on a separate
    // random stream.
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig base = default_config("ieee33_mg");
    base.iterations = 2;
    base.horizon_hours = 400;
    base.microgrid_mode = ControllerMode::no_support;
    base.forced_failures.push_back({"L5", 80, 6.0});

    ScenarioConfig alt = base;
    base.battery_initial = BatteryInitPolicy::uniform;
    alt.battery_initial = BatteryInitPolicy::full;

    ResultSet a = run_simulation(net, base);
    ResultSet b = run_simulation(net, alt);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) CHECK(same_report(a.rows[i].distribution, b.rows[i].distribution));
}

TEST_CASE("reruns and single-iteration replays are identical") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = 4;
    cfg.horizon_hours = 2000;
    cfg.workers = 1;

    ResultSet a = run_simulation(net, cfg);
    ResultSet b = run_simulation(net, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) CHECK(same_row(a.rows[i], b.rows[i]));

    SimulationContext ctx(net, cfg);
    for (int i = 0; i < 4; ++i) {
        IterationResult once = ctx.run_iteration(i);
        IterationResult twice = ctx.run_iteration(i);
        CHECK(same_row(once, twice));
        CHECK(same_row(once, a.rows[static_cast<size_t>(i)]));
    }
}

TEST_CASE("results do not depend on the worker count") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = 6;
    cfg.horizon_hours = 1500;

    cfg.workers = 1;
    ResultSet serial = run_simulation(net, cfg);
    cfg.workers = 3;
    ResultSet parallel = run_simulation(net, cfg);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (size_t i = 0; i < serial.rows.size(); ++i) CHECK(same_row(serial.rows[i], parallel.rows[i]));
    for (size_t i = 0; i < serial.running_mean_dist_ens.size(); ++i) {
        CHECK(serial.running_mean_dist_ens[i] == parallel.running_mean_dist_ens[i]);
        CHECK(serial.running_mean_mg_ens[i] == parallel.running_mean_mg_ens[i]);
    }
}

TEST_CASE("different seeds explore different histories") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = 3;
    cfg.workers = 1;
    cfg.master_seed = 1;
    ResultSet a = run_simulation(net, cfg);
    cfg.master_seed = 2;
    ResultSet b = run_simulation(net, cfg);
    bool any_diff = false;
    for (size_t i = 0; i < a.rows.size(); ++i)
        if (a.rows[i].distribution.ens_mwh != b.rows[i].distribution.ens_mwh) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("running means and sample extracts agree with the rows") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = 5;
    cfg.horizon_hours = 3000;
    cfg.workers = 1;
    ResultSet rs = run_simulation(net, cfg);
    std::vector<double> d = rs.dist_ens_samples();
    std::vector<double> m = rs.mg_ens_samples();
    REQUIRE(d.size() == 5);
    double acc = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i] == rs.rows[i].distribution.ens_mwh);
        CHECK(m[i] == rs.rows[i].microgrid.ens_mwh);
        acc += d[i];
        CHECK(rs.running_mean_dist_ens[i] == doctest::Approx(acc / static_cast<double>(i + 1)).epsilon(1e-12));
    }
    CHECK(rs.mean_dist_ens() == doctest::Approx(acc / 5.0).epsilon(1e-12));
}
