#pragma once

#include <string>
#include <vector>

#include "gridrel/engine.hpp"
#include "gridrel/network.hpp"

namespace gridrel {

// Three-run comparison of the controller modes under common random numbers:
// s1 = no_support, s2 = full_support, s3 = limited_support. Writes
// scenarios/{s1,s2,s3}/results.csv, scenarios/stats.json, means/box-plot
// data, a short text report, and a manifest under `out_dir`.
struct ScenarioStudyResult {
    ResultSet s1;
    ResultSet s2;
    ResultSet s3;
};
ScenarioStudyResult run_scenarios(const RadialNetwork& net, const ScenarioConfig& base, const std::string& out_dir,
                                  bool plots = false);

// Full-factorial sensitivity grid, run in the limited-support mode:
// battery capacity {1, 2} MWh x repair-time quantile {1, 2, 3} h x
// failure rate {0.05, 0.07, 0.09} per km-year. `base.iterations` applies per
// cell. Writes factorial/cells.csv and factorial/interactions.csv.
struct FactorialLevels {
    std::vector<double> battery_mwh = {1.0, 2.0};
    std::vector<double> repair_quantile_h = {1.0, 2.0, 3.0};
    std::vector<double> failure_rate_per_km = {0.05, 0.07, 0.09};
};
struct FactorialCell {
    double battery_mwh = 0.0;
    double repair_quantile_h = 0.0;
    double failure_rate_per_km = 0.0;
    ResultSet results;
};
std::vector<FactorialCell> run_factorial(const RadialNetwork& net, const ScenarioConfig& base,
                                         const FactorialLevels& levels, const std::string& out_dir,
                                         bool plots = false);

// Re-attaches the microgrid connection line to every distribution bus in turn
// and records the distribution system's mean ENS. Writes location/heatmap.csv.
struct LocationEntry {
    std::string bus;
    double x = 0.0;
    double y = 0.0;
    double mean_dist_ens_mwh = 0.0;
    double stddev_dist_ens_mwh = 0.0;
    double mean_mg_ens_mwh = 0.0;
};
std::vector<LocationEntry> run_location_sweep(const RadialNetwork& net, const ScenarioConfig& base,
                                              const std::string& out_dir, bool plots = false);

}  // namespace gridrel
