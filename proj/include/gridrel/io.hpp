#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridrel/engine.hpp"
#include "gridrel/network.hpp"
#include "gridrel/power_flow.hpp"

namespace gridrel {

// Full-precision decimal form; parses back to the identical double.
std::string format_double(double v);

// ---- network files -------------------------------------------------------
// JSON document with top-level keys: buses, lines, switchgear, networks,
// slack_bus, meta. Throws std::runtime_error with file/field context on
// malformed input, schema violations, or validation failures.
RadialNetwork parse_network_json(const std::string& text);
std::string network_to_json_text(const RadialNetwork& net);
RadialNetwork load_network_file(const std::string& path);
void save_network_file(const RadialNetwork& net, const std::string& path);

// ---- scenario config files ----------------------------------------------
ScenarioConfig parse_config_json(const std::string& text);
std::string config_to_json_text(const ScenarioConfig& cfg);
ScenarioConfig load_config_file(const std::string& path);
void save_config_file(const ScenarioConfig& cfg, const std::string& path);

// ---- result files --------------------------------------------------------
// One row per iteration and network ("distribution_system", and "microgrid"
// when present): iteration, network, ENS_MWh, CENS, SAIFI, SAIDI_h, CAIDI_h.
// Returns the number of data rows written.
int write_results_csv(const ResultSet& rs, const std::string& path);

// Means, standard deviations and the running-mean convergence trace.
void write_summary_json(const ResultSet& rs, const std::string& path);

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory
    int rows = 0;
};
void write_manifest(const std::vector<ManifestEntry>& files, std::uint64_t master_seed, const std::string& path);

// Voltage and flow tables of one solved operating point.
std::string flow_solution_csv(const RadialNetwork& net, const SubSystem& sub, const FlowSolution& flow);

// ---- small file helpers --------------------------------------------------
std::string read_text_file(const std::string& path);  // throws std::runtime_error
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gridrel
