#include "gridrel/microgrid.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridrel {

const char* to_string(ControllerMode m) {
    switch (m) {
        case ControllerMode::no_support: return "no_support";
        case ControllerMode::full_support: return "full_support";
        case ControllerMode::limited_support: return "limited_support";
    }
    return "no_support";
}

ControllerMode controller_mode_from_string(const std::string& s) {
    if (s == "no_support") return ControllerMode::no_support;
    if (s == "full_support") return ControllerMode::full_support;
    if (s == "limited_support") return ControllerMode::limited_support;
    throw std::invalid_argument("unknown controller mode: " + s);
}

SupportBudget support_budget(ControllerMode mode, const BatterySpec& battery, double peak_mg_load_mw,
                             double reserve_hours) {
    SupportBudget b;
    b.own_floor_mwh = battery.min_soc * battery.capacity_mwh;
    switch (mode) {
        case ControllerMode::no_support:
            b.export_floor_mwh = battery.capacity_mwh;  // never exports
            break;
        case ControllerMode::full_support:
            b.export_floor_mwh = b.own_floor_mwh;
            break;
        case ControllerMode::limited_support:
            b.export_floor_mwh = std::min(battery.capacity_mwh,
                                          b.own_floor_mwh + reserve_hours * peak_mg_load_mw);
            break;
    }
    return b;
}

ControllerState controller_step(ControllerMode mode, ControllerState state, const RadialNetwork& net,
                                ComponentState& cs, bool new_outage, bool any_recovered, double sectioning_time_h) {
    if (new_outage) {
        state.breaker_open = true;
        state.sectioning_remaining_h = sectioning_time_h;
        state.islanded_with.clear();
        return state;
    }
    if (!state.breaker_open) return state;
    if (state.sectioning_remaining_h > 0.0 && !any_recovered) return state;

    int conn = net.connection_line ? net.line_index(*net.connection_line) : -1;
    if (conn >= 0 && cs.failed[static_cast<size_t>(conn)]) return state;  // own line down: stay open

    if (mode == ControllerMode::no_support) {
        for (size_t l = 0; l < net.lines.size(); ++l)
            if (cs.failed[l] && !net.line_in_microgrid(static_cast<int>(l))) return state;
    }

    // Isolate failed internal sections, then close.
    for (size_t l = 0; l < net.lines.size(); ++l)
        if (cs.failed[l] && net.line_in_microgrid(static_cast<int>(l)) && static_cast<int>(l) != conn)
            cs.isolated[l] = true;
    state.breaker_open = false;
    state.sectioning_remaining_h = 0.0;
    state.islanded_with.clear();
    return state;
}

}  // namespace gridrel
