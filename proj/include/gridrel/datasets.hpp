#pragma once

#include <string>
#include <vector>

#include "gridrel/engine.hpp"
#include "gridrel/network.hpp"

namespace gridrel {

// Embedded dataset ids: "ieee33" (canonical 33-bus feeder at its original
// loading, used by the load-flow cross-checks) and "ieee33_mg" (the study
// network: doubled loads, lengths derived from impedance, and a microgrid
// with wind, solar and a battery attached at B33).
std::vector<std::string> embedded_dataset_ids();
bool is_embedded_dataset(const std::string& id);

// Throws std::invalid_argument for unknown ids.
RadialNetwork make_network(const std::string& id);

// Scenario defaults matched to the dataset: profile specs for every load and
// generation unit, interruption cost table, battery spec.
ScenarioConfig default_config(const std::string& id);

// Embedded network when `id_or_path` is a dataset id, otherwise parses the
// file at that path.
RadialNetwork resolve_network(const std::string& id_or_path);

// Copy of `base` with the microgrid connection line re-attached to the given
// distribution bus (for the location sweep). Throws std::invalid_argument if
// the network has no microgrid or the bus is unknown/not a distribution bus.
RadialNetwork reattach_microgrid(const RadialNetwork& base, const std::string& bus_id);

}  // namespace gridrel
