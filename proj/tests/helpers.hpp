// Shared builders for small deterministic test networks.
#pragma once

#include <string>
#include <vector>

#include "gridrel/engine.hpp"
#include "gridrel/network.hpp"

namespace testutil {

using namespace gridrel;

// B1 (slack) -- L1 -- B2 -- L2 -- B3. Flat loads at B2/B3, a feeder breaker
// on L1 and disconnectors at both ends of every line. Repair times fixed so
// event timelines are exact.
inline RadialNetwork three_bus_feeder(double rate_l1_per_km_yr, double rate_l2_per_km_yr, double repair_h,
                                      double load_b2_mw = 1.0, double load_b3_mw = 1.0) {
    RadialNetwork net;
    for (int i = 1; i <= 3; ++i) {
        Bus b;
        b.id = "B" + std::to_string(i);
        b.x = i;
        net.buses.push_back(b);
    }
    net.buses[1].load_ref = "LD2";
    net.buses[1].customer_count = 10;
    net.buses[2].load_ref = "LD3";
    net.buses[2].customer_count = 10;
    if (load_b2_mw <= 0.0) net.buses[1].load_ref.reset();
    if (load_b3_mw <= 0.0) net.buses[2].load_ref.reset();

    for (int i = 1; i <= 2; ++i) {
        Line l;
        l.id = "L" + std::to_string(i);
        l.from_bus = "B" + std::to_string(i);
        l.to_bus = "B" + std::to_string(i + 1);
        l.resistance = 0.001;
        l.reactance = 0.001;
        l.length_km = 1.0;
        l.capacity_mw = 100.0;
        l.failure_rate_per_km = i == 1 ? rate_l1_per_km_yr : rate_l2_per_km_yr;
        l.repair_time_dist = RepairDist::make_fixed(repair_h);
        net.lines.push_back(l);
    }

    Switchgear cb;
    cb.id = "CB1";
    cb.kind = SwitchKind::circuit_breaker;
    cb.host_line = "L1";
    cb.host_bus = "B1";
    cb.sectioning_time_h = 1.0;
    net.switchgear.push_back(cb);
    for (const auto& l : net.lines)
        for (int end = 0; end < 2; ++end) {
            Switchgear d;
            d.id = "D" + l.id.substr(1) + (end == 0 ? "a" : "b");
            d.kind = SwitchKind::disconnector;
            d.host_line = l.id;
            d.host_bus = end == 0 ? l.from_bus : l.to_bus;
            net.switchgear.push_back(d);
        }

    net.slack_bus = "B1";
    net.distribution_buses = {"B1", "B2", "B3"};
    net.build_index();
    return net;
}

inline ScenarioConfig three_bus_config(double load_b2_mw = 1.0, double load_b3_mw = 1.0) {
    ScenarioConfig cfg;
    cfg.network = "three_bus";
    cfg.iterations = 1;
    cfg.horizon_hours = 8760;
    cfg.master_seed = 7;
    cfg.cens_cost = {{"household", 10.0}, {"farm", 25.0}, {"office", 60.0}, {"trade", 80.0}, {"industry", 100.0}};
    cfg.profiles.flat_loads = true;
    if (load_b2_mw > 0.0) cfg.profiles.loads["LD2"] = LoadSpec{load_b2_mw, 0.0};
    if (load_b3_mw > 0.0) cfg.profiles.loads["LD3"] = LoadSpec{load_b3_mw, 0.0};
    return cfg;
}

}  // namespace testutil
