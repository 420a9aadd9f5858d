#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridrel/indices.hpp"
#include "gridrel/microgrid.hpp"
#include "gridrel/network.hpp"
#include "gridrel/profiles.hpp"
#include "gridrel/stochastic.hpp"

namespace gridrel {

struct ForcedFailure {
    std::string line;
    int hour = 0;
    double repair_hours = 0.0;
};

enum class BatteryInitPolicy { auto_mode, uniform, full };

struct ScenarioConfig {
    std::string network = "ieee33_mg";  // embedded dataset id or path to a file
    ControllerMode microgrid_mode = ControllerMode::full_support;
    double reserve_hours = 4.0;
    int iterations = 5000;
    int horizon_hours = 8760;
    double step_hours = 1.0;
    std::uint64_t master_seed = 1;
    std::optional<double> sectioning_time_h;  // overrides every breaker when set
    std::map<std::string, double> cens_cost;  // per customer category, per MWh
    BatterySpec battery;
    BatteryInitPolicy battery_initial = BatteryInitPolicy::auto_mode;
    ProfileConfig profiles;
    std::optional<double> failure_rate_override_per_km;
    std::optional<double> repair_quantile_hours;  // re-calibrates gamma scales
    double repair_quantile_prob = 0.67;
    double feeder_capacity_mw = 1e5;
    std::vector<ForcedFailure> forced_failures;
    int workers = 0;  // 0 = hardware concurrency
};

struct IterationResult {
    int iteration = 0;
    bool has_microgrid = false;
    IndexReport distribution;
    IndexReport microgrid;
    int fbs_not_converged = 0;
    int lp_infeasible = 0;
    int lp_errors = 0;
};

struct ResultSet {
    std::vector<IterationResult> rows;  // iteration order
    std::vector<double> running_mean_dist_ens;
    std::vector<double> running_mean_mg_ens;
    std::uint64_t master_seed = 0;
    double wall_seconds = 0.0;

    double mean_dist_ens() const;
    double mean_mg_ens() const;
    std::vector<double> dist_ens_samples() const;
    std::vector<double> mg_ens_samples() const;
};

// Fixed data shared by all iterations of one simulation run.
class SimulationContext {
  public:
    SimulationContext(RadialNetwork net, ScenarioConfig cfg);

    IterationResult run_iteration(int iteration) const;
    const RadialNetwork& network() const { return net_; }
    const ScenarioConfig& config() const { return cfg_; }
    const ProfileSet& profiles() const { return profiles_; }

  private:
    friend struct IterationRunner;
    RadialNetwork net_;
    ScenarioConfig cfg_;
    ProfileSet profiles_;

    struct LoadPoint {
        int bus = -1;
        std::string ref;
        double cost = 0.0;
        int customers = 0;
        bool in_microgrid = false;
    };
    std::vector<LoadPoint> load_points_;
    std::vector<int> bus_to_point_;  // -1 when the bus carries no load

    struct GenUnit {
        int bus = -1;
        std::string ref;
    };
    std::vector<GenUnit> gen_units_;  // sorted by bus index

    int feeder_breaker_ = -1;   // switch index, -1 if absent
    int feeder_breaker_line_ = -1;
    double feeder_sectioning_h_ = 0.0;
    int mg_breaker_ = -1;
    int connection_line_ = -1;
    int battery_bus_ = -1;
    double peak_mg_load_mw_ = 0.0;
    SupportBudget budget_;
    std::map<int, std::vector<ForcedFailure>> forced_by_hour_;
    std::vector<double> fail_prob_;  // per line, per increment
};

// Runs all iterations (in parallel when workers > 1) and aggregates. Results
// are identical for any worker count.
ResultSet run_simulation(const RadialNetwork& net, const ScenarioConfig& cfg);

}  // namespace gridrel
