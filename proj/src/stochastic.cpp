#include "gridrel/stochastic.hpp"

#include <algorithm>
#include <cmath>

namespace gridrel {

namespace {
constexpr double kHoursPerYear = 8760.0;
}

std::vector<double> failure_probabilities(const RadialNetwork& net, double dt_h) {
    std::vector<double> p(net.lines.size(), 0.0);
    for (size_t i = 0; i < net.lines.size(); ++i) {
        double rate_per_h = net.lines[i].failure_rate_per_km * net.lines[i].length_km / kHoursPerYear;
        if (rate_per_h > 0.0) p[i] = 1.0 - std::exp(-rate_per_h * dt_h);
    }
    return p;
}

std::vector<int> draw_failures(const RadialNetwork& net, ComponentState& state, std::mt19937_64& rng, double dt_h,
                               const std::vector<double>& fail_prob) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> fresh;
    for (size_t i = 0; i < net.lines.size(); ++i) {
        if (state.failed[i]) continue;
        double u = unif(rng);
        if (u < fail_prob[i]) {
            state.failed[i] = true;
            state.remaining_repair_h[i] = net.lines[i].repair_time_dist.sample(rng);
            fresh.push_back(static_cast<int>(i));
        }
    }
    return fresh;
}

std::vector<int> draw_failures(const RadialNetwork& net, ComponentState& state, std::mt19937_64& rng, double dt_h) {
    return draw_failures(net, state, rng, dt_h, failure_probabilities(net, dt_h));
}

double battery_available_mw(const BatterySpec& spec, const BatteryState& state, double dt_h, double reserve_floor_mwh) {
    double headroom = std::max(0.0, state.soc_mwh - reserve_floor_mwh);
    return std::min(spec.inverter_mw, spec.efficiency * headroom / dt_h);
}

double battery_dispatch(const BatterySpec& spec, BatteryState& state, double requested_mw, double dt_h,
                        double reserve_floor_mwh) {
    if (requested_mw > 0.0) {
        double delivered = std::min(requested_mw, battery_available_mw(spec, state, dt_h, reserve_floor_mwh));
        delivered = std::max(0.0, delivered);
        state.soc_mwh -= delivered * dt_h / spec.efficiency;
        state.soc_mwh = std::max(state.soc_mwh, 0.0);
        return delivered;
    }
    if (requested_mw < 0.0) {
        double room = std::max(0.0, spec.capacity_mwh - state.soc_mwh);
        double accepted = std::min({-requested_mw, spec.inverter_mw, room / (spec.efficiency * dt_h)});
        accepted = std::max(0.0, accepted);
        state.soc_mwh += accepted * dt_h * spec.efficiency;
        return -accepted;
    }
    return 0.0;
}

}  // namespace gridrel
