#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gridrel/gamma.hpp"

namespace gridrel {

enum class CustomerCategory { household, farm, industry, trade, office };

const char* to_string(CustomerCategory c);
CustomerCategory customer_category_from_string(const std::string& s);

struct Bus {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::optional<std::string> load_ref;        // key into the profile config
    std::optional<std::string> generation_ref;  // key into the profile config
    int customer_count = 0;
    CustomerCategory customer_category = CustomerCategory::household;
};

struct Line {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double resistance = 0.0;  // per unit
    double reactance = 0.0;   // per unit
    double length_km = 0.0;
    double capacity_mw = 0.0;  // max |P| transfer
    double failure_rate_per_km = 0.0;  // failures / (year * km)
    RepairDist repair_time_dist;
};

enum class SwitchKind { disconnector, circuit_breaker };

// Static description only; open/closed during simulation is dynamic state
// owned by the engine.
struct Switchgear {
    std::string id;
    SwitchKind kind = SwitchKind::disconnector;
    std::string host_line;
    std::string host_bus;  // which end of the line it sits on
    bool normally_closed = true;
    double sectioning_time_h = 0.0;  // circuit breakers only
};

struct NetworkMeta {
    double s_base_mva = 10.0;
    double v_base_kv = 12.66;
    double length_scale_km_per_ohm = 0.0;  // 0 when lengths are not impedance derived
};

// A connected set of buses and in-service lines produced by partitioning the
// grid after failures and switching actions.
struct SubSystem {
    std::vector<int> bus_idx;
    std::vector<int> line_idx;
    bool contains_slack = false;
    bool has_generation = false;
    bool has_battery = false;
};

struct ValidationIssue {
    std::string code;
    std::string component;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

class RadialNetwork {
  public:
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Switchgear> switchgear;
    std::string slack_bus;
    std::vector<std::string> distribution_buses;
    std::vector<std::string> microgrid_buses;
    std::optional<std::string> connection_line;  // carries the microgrid breaker
    std::optional<std::string> battery_bus;
    NetworkMeta meta;

    // Builds index maps and adjacency. Must be called after the component
    // vectors are filled and before any query below.
    void build_index();

    ValidationReport validate() const;

    int bus_index(const std::string& id) const;
    int line_index(const std::string& id) const;
    int switch_index(const std::string& id) const;
    bool has_bus(const std::string& id) const { return bus_ids_.count(id) != 0; }
    bool has_line(const std::string& id) const { return line_ids_.count(id) != 0; }

    int slack_index() const { return slack_idx_; }
    bool bus_in_microgrid(int bus_idx) const { return microgrid_mask_[static_cast<size_t>(bus_idx)]; }
    bool line_in_microgrid(int line_idx) const { return mg_line_mask_[static_cast<size_t>(line_idx)]; }
    const std::vector<std::pair<int, int>>& adjacent(int bus_idx) const {  // (line, other bus)
        return adjacency_[static_cast<size_t>(bus_idx)];
    }
    const std::vector<int>& switches_on_line(int line_idx) const {
        return line_switches_[static_cast<size_t>(line_idx)];
    }

    // Connected components over in-service lines. A line is out of service if
    // it failed or any switchgear on it is open. Components are ordered by
    // their smallest bus index; bus and line lists are index sorted.
    std::vector<SubSystem> find_sub_systems(const std::vector<bool>& failed_lines,
                                            const std::vector<bool>& open_switchgear) const;

    // Buses whose path to the slack runs through the given line, assuming the
    // full intact network. Throws std::invalid_argument for unknown ids.
    std::vector<int> downstream_of(const std::string& line_id) const;

  private:
    std::unordered_map<std::string, int> bus_ids_;
    std::unordered_map<std::string, int> line_ids_;
    std::unordered_map<std::string, int> switch_ids_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_;
    std::vector<std::vector<int>> line_switches_;
    std::vector<bool> microgrid_mask_;
    std::vector<bool> mg_line_mask_;
    int slack_idx_ = -1;
};

}  // namespace gridrel
