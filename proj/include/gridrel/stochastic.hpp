#pragma once

#include <random>
#include <vector>

#include "gridrel/network.hpp"

namespace gridrel {

struct BatterySpec {
    double capacity_mwh = 1.0;
    double inverter_mw = 0.5;
    double efficiency = 0.95;  // one-way; round trip is efficiency squared
    double min_soc = 0.1;      // fraction of capacity
};

struct BatteryState {
    double soc_mwh = 0.0;
};

// Dynamic state of the failable components over one iteration.
struct ComponentState {
    std::vector<bool> failed;                // per line
    std::vector<double> remaining_repair_h;  // per line, valid while failed
    std::vector<bool> isolated;              // per line, disconnectors opened after sectioning
    BatteryState battery;

    void reset(size_t line_count) {
        failed.assign(line_count, false);
        remaining_repair_h.assign(line_count, 0.0);
        isolated.assign(line_count, false);
    }
    bool any_failed() const {
        for (bool f : failed)
            if (f) return true;
        return false;
    }
};

// Bernoulli failure draws for every healthy line over one increment, with
// p = 1 - exp(-lambda * dt) and lambda the per-hour rate of the line. Every
// healthy line draws exactly one uniform regardless of the rest of the system
// state, so the failure history depends only on this stream. Returns the
// indices of newly failed lines (repair duration already sampled into state).
std::vector<int> draw_failures(const RadialNetwork& net, ComponentState& state, std::mt19937_64& rng, double dt_h);

// Per-line per-increment failure probabilities, precomputable because they
// depend only on static line data and the step length.
std::vector<double> failure_probabilities(const RadialNetwork& net, double dt_h);

// Same draw as above against precomputed probabilities (hot path).
std::vector<int> draw_failures(const RadialNetwork& net, ComponentState& state, std::mt19937_64& rng, double dt_h,
                               const std::vector<double>& fail_prob);

// Requested power in MW: positive discharges toward the grid, negative
// charges. Returns the power actually exchanged at the grid side; state of
// charge is updated with the one-way efficiency applied on each leg. Discharge
// never takes the stored energy below reserve_floor_mwh.
double battery_dispatch(const BatterySpec& spec, BatteryState& state, double requested_mw, double dt_h,
                        double reserve_floor_mwh);

// Max power the battery can put on the grid over the next increment without
// dipping below the given floor.
double battery_available_mw(const BatterySpec& spec, const BatteryState& state, double dt_h, double reserve_floor_mwh);

}  // namespace gridrel
