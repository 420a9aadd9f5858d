#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridrel/network.hpp"

namespace gridrel {

struct LoadSpec {
    double peak_mw = 0.0;
    std::optional<double> peak_mvar;  // defaults to peak_mw * tan(acos(pf))
};

enum class GenKind { wind, solar };

struct GenerationUnitSpec {
    GenKind kind = GenKind::wind;
    double rated_mw = 0.0;
};

struct WindCurve {
    double cut_in_ms = 3.0;
    double rated_ms = 12.0;
    double cut_out_ms = 25.0;
};

struct ProfileConfig {
    double power_factor = 0.95;
    bool flat_loads = false;  // shape == 1 everywhere; used by fixed-load test feeders
    double combined_renewable_peak_mw = 0.0;  // 0 disables rescaling
    WindCurve wind_curve;
    std::map<std::string, LoadSpec> loads;                 // keyed by load_ref
    std::map<std::string, GenerationUnitSpec> generation;  // keyed by generation_ref
    std::optional<std::string> weather_csv;  // replaces the synthetic weather/load shape
};

// Hourly series for one simulated year, shared by all iterations of a run.
struct ProfileSet {
    int horizon = 0;
    std::map<std::string, std::vector<double>> load_p_mw;    // keyed by load_ref
    std::map<std::string, std::vector<double>> load_q_mvar;  // keyed by load_ref
    std::map<std::string, std::vector<double>> gen_p_mw;     // keyed by generation_ref

    double load_p(const std::string& ref, int hour) const {
        auto it = load_p_mw.find(ref);
        return it == load_p_mw.end() ? 0.0 : it->second[static_cast<size_t>(hour)];
    }
    double load_q(const std::string& ref, int hour) const {
        auto it = load_q_mvar.find(ref);
        return it == load_q_mvar.end() ? 0.0 : it->second[static_cast<size_t>(hour)];
    }
    double gen_p(const std::string& ref, int hour) const {
        auto it = gen_p_mw.find(ref);
        return it == gen_p_mw.end() ? 0.0 : it->second[static_cast<size_t>(hour)];
    }
};

// Deterministic for a given seed. Synthetic shapes follow the customer
// category of the bus owning each load ref; weather CSV input
// (hour, wind_speed_ms, irradiance, load_scale) overrides the synthetic
// weather and load shape when configured.
ProfileSet generate_profiles(const RadialNetwork& net, const ProfileConfig& cfg, int horizon, std::uint64_t seed);

double wind_power(const WindCurve& curve, double rated_mw, double speed_ms);

}  // namespace gridrel
