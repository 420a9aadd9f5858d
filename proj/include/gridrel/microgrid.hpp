#pragma once

#include <vector>

#include "gridrel/network.hpp"
#include "gridrel/stochastic.hpp"

namespace gridrel {

enum class ControllerMode { no_support, full_support, limited_support };

const char* to_string(ControllerMode m);
ControllerMode controller_mode_from_string(const std::string& s);

struct ControllerState {
    bool breaker_open = false;
    double sectioning_remaining_h = 0.0;
    // Distribution bus indices sharing the microgrid's island; empty when the
    // microgrid is alone or connected through to the slack.
    std::vector<int> islanded_with;
};

// Energy floors governing the battery during an event. own_floor bounds what
// the microgrid itself may draw; export_floor additionally protects the
// reserve kept for later self-supply and applies to power leaving over the
// connection line.
struct SupportBudget {
    double own_floor_mwh = 0.0;
    double export_floor_mwh = 0.0;
};

SupportBudget support_budget(ControllerMode mode, const BatterySpec& battery, double peak_mg_load_mw,
                             double reserve_hours);

// One controller decision per increment, run before sub-systems are formed.
//
//   - any new outage anywhere opens the breaker and restarts its sectioning
//     countdown;
//   - once the countdown has elapsed (or a line just recovered), the breaker
//     recloses unless its own line is failed; without support it additionally
//     waits until no distribution line is failed at all; with support it
//     isolates failed microgrid sections first and closes into whatever part
//     of the grid is available.
//
// Isolation opens the disconnectors of failed internal lines via
// state.isolated. The countdown itself is decremented by the caller at the
// end of the increment.
ControllerState controller_step(ControllerMode mode, ControllerState state, const RadialNetwork& net,
                                ComponentState& cs, bool new_outage, bool any_recovered, double sectioning_time_h);

}  // namespace gridrel
