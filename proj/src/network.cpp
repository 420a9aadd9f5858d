#include "gridrel/network.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace gridrel {

const char* to_string(CustomerCategory c) {
    switch (c) {
        case CustomerCategory::household: return "household";
        case CustomerCategory::farm: return "farm";
        case CustomerCategory::industry: return "industry";
        case CustomerCategory::trade: return "trade";
        case CustomerCategory::office: return "office";
    }
    return "household";
}

CustomerCategory customer_category_from_string(const std::string& s) {
    if (s == "household") return CustomerCategory::household;
    if (s == "farm") return CustomerCategory::farm;
    if (s == "industry") return CustomerCategory::industry;
    if (s == "trade") return CustomerCategory::trade;
    if (s == "office") return CustomerCategory::office;
    throw std::invalid_argument("unknown customer category: " + s);
}

void RadialNetwork::build_index() {
    bus_ids_.clear();
    line_ids_.clear();
    switch_ids_.clear();
    for (size_t i = 0; i < buses.size(); ++i) bus_ids_.emplace(buses[i].id, static_cast<int>(i));
    for (size_t i = 0; i < lines.size(); ++i) line_ids_.emplace(lines[i].id, static_cast<int>(i));
    for (size_t i = 0; i < switchgear.size(); ++i) switch_ids_.emplace(switchgear[i].id, static_cast<int>(i));

    adjacency_.assign(buses.size(), {});
    for (size_t i = 0; i < lines.size(); ++i) {
        auto f = bus_ids_.find(lines[i].from_bus);
        auto t = bus_ids_.find(lines[i].to_bus);
        if (f == bus_ids_.end() || t == bus_ids_.end()) continue;  // reported by validate()
        adjacency_[static_cast<size_t>(f->second)].emplace_back(static_cast<int>(i), t->second);
        adjacency_[static_cast<size_t>(t->second)].emplace_back(static_cast<int>(i), f->second);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    line_switches_.assign(lines.size(), {});
    for (size_t i = 0; i < switchgear.size(); ++i) {
        auto l = line_ids_.find(switchgear[i].host_line);
        if (l != line_ids_.end()) line_switches_[static_cast<size_t>(l->second)].push_back(static_cast<int>(i));
    }

    microgrid_mask_.assign(buses.size(), false);
    for (const auto& id : microgrid_buses) {
        auto it = bus_ids_.find(id);
        if (it != bus_ids_.end()) microgrid_mask_[static_cast<size_t>(it->second)] = true;
    }
    mg_line_mask_.assign(lines.size(), false);
    for (size_t i = 0; i < lines.size(); ++i) {
        auto f = bus_ids_.find(lines[i].from_bus);
        auto t = bus_ids_.find(lines[i].to_bus);
        bool mg_f = f != bus_ids_.end() && microgrid_mask_[static_cast<size_t>(f->second)];
        bool mg_t = t != bus_ids_.end() && microgrid_mask_[static_cast<size_t>(t->second)];
        mg_line_mask_[i] = mg_f && mg_t;
    }
    if (connection_line) {
        auto it = line_ids_.find(*connection_line);
        if (it != line_ids_.end()) mg_line_mask_[static_cast<size_t>(it->second)] = true;
    }

    auto s = bus_ids_.find(slack_bus);
    slack_idx_ = s == bus_ids_.end() ? -1 : s->second;
}

int RadialNetwork::bus_index(const std::string& id) const {
    auto it = bus_ids_.find(id);
    if (it == bus_ids_.end()) throw std::invalid_argument("unknown bus id: " + id);
    return it->second;
}

int RadialNetwork::line_index(const std::string& id) const {
    auto it = line_ids_.find(id);
    if (it == line_ids_.end()) throw std::invalid_argument("unknown line id: " + id);
    return it->second;
}

int RadialNetwork::switch_index(const std::string& id) const {
    auto it = switch_ids_.find(id);
    if (it == switch_ids_.end()) throw std::invalid_argument("unknown switchgear id: " + id);
    return it->second;
}

ValidationReport RadialNetwork::validate() const {
    ValidationReport rep;
    auto issue = [&rep](std::string code, std::string component, std::string message) {
        rep.issues.push_back({std::move(code), std::move(component), std::move(message)});
    };

    std::unordered_set<std::string> seen;
    for (const auto& b : buses)
        if (!seen.insert(b.id).second) issue("duplicate_id", b.id, "duplicate bus id");
    seen.clear();
    for (const auto& l : lines)
        if (!seen.insert(l.id).second) issue("duplicate_id", l.id, "duplicate line id");
    seen.clear();
    for (const auto& s : switchgear)
        if (!seen.insert(s.id).second) issue("duplicate_id", s.id, "duplicate switchgear id");

    for (const auto& l : lines) {
        if (!bus_ids_.count(l.from_bus)) issue("unknown_bus", l.id, "from_bus '" + l.from_bus + "' does not exist");
        if (!bus_ids_.count(l.to_bus)) issue("unknown_bus", l.id, "to_bus '" + l.to_bus + "' does not exist");
        if (l.from_bus == l.to_bus) issue("self_loop", l.id, "line connects a bus to itself");
        if (l.length_km <= 0.0) issue("bad_value", l.id, "length must be positive");
        if (l.capacity_mw <= 0.0) issue("bad_value", l.id, "capacity must be positive");
        if (l.resistance < 0.0 || l.reactance < 0.0) issue("bad_value", l.id, "impedance must be non-negative");
        if (l.failure_rate_per_km < 0.0) issue("bad_value", l.id, "failure rate must be non-negative");
    }
    for (const auto& b : buses)
        if (b.customer_count < 0) issue("bad_value", b.id, "customer count must be non-negative");

    for (const auto& s : switchgear) {
        auto l = line_ids_.find(s.host_line);
        if (l == line_ids_.end()) {
            issue("unknown_line", s.id, "host line '" + s.host_line + "' does not exist");
            continue;
        }
        const Line& host = lines[static_cast<size_t>(l->second)];
        if (s.host_bus != host.from_bus && s.host_bus != host.to_bus)
            issue("bad_placement", s.id, "host bus '" + s.host_bus + "' is not an end of line " + host.id);
        if (s.kind == SwitchKind::circuit_breaker && s.sectioning_time_h <= 0.0)
            issue("bad_value", s.id, "circuit breaker needs a positive sectioning time");
    }

    if (!bus_ids_.count(slack_bus)) {
        issue("missing_slack", slack_bus.empty() ? "<none>" : slack_bus, "slack bus is not defined in buses");
    }

    // Radial operation: the in-service grid has to be a spanning tree.
    if (!buses.empty() && bus_ids_.count(slack_bus)) {
        if (lines.size() != buses.size() - 1)
            issue("not_a_tree", "<topology>",
                  "expected " + std::to_string(buses.size() - 1) + " lines for " + std::to_string(buses.size()) +
                      " buses, got " + std::to_string(lines.size()));
        std::vector<bool> visited(buses.size(), false);
        std::deque<int> queue{slack_idx_ >= 0 ? slack_idx_ : 0};
        visited[static_cast<size_t>(queue.front())] = true;
        size_t reached = 1;
        while (!queue.empty()) {
            int b = queue.front();
            queue.pop_front();
            for (auto [line, other] : adjacency_[static_cast<size_t>(b)]) {
                (void)line;
                if (!visited[static_cast<size_t>(other)]) {
                    visited[static_cast<size_t>(other)] = true;
                    ++reached;
                    queue.push_back(other);
                }
            }
        }
        if (reached != buses.size())
            for (size_t i = 0; i < buses.size(); ++i)
                if (!visited[i]) issue("disconnected", buses[i].id, "bus has no path to the slack bus");
        if (lines.size() == buses.size() - 1 && reached == buses.size()) {
            // connected with |V|-1 edges: acyclic; nothing further to check
        } else if (lines.size() >= buses.size() && reached == buses.size()) {
            issue("cycle", "<topology>", "network contains a cycle");
        }
    }

    // Partition bookkeeping.
    std::unordered_set<std::string> part;
    for (const auto& id : distribution_buses) {
        if (!bus_ids_.count(id)) issue("unknown_bus", id, "distribution_system references unknown bus");
        if (!part.insert(id).second) issue("partition_overlap", id, "bus listed twice in the partition");
    }
    for (const auto& id : microgrid_buses) {
        if (!bus_ids_.count(id)) issue("unknown_bus", id, "microgrid references unknown bus");
        if (!part.insert(id).second) issue("partition_overlap", id, "bus listed twice in the partition");
    }
    if (part.size() != buses.size() && (!distribution_buses.empty() || !microgrid_buses.empty()))
        for (const auto& b : buses)
            if (!part.count(b.id)) issue("partition_gap", b.id, "bus missing from the network partition");

    if (!microgrid_buses.empty()) {
        if (!connection_line) {
            issue("missing_connection", "<microgrid>", "microgrid present but no connection line named");
        } else if (!line_ids_.count(*connection_line)) {
            issue("unknown_line", *connection_line, "connection line does not exist");
        } else {
            const Line& cl = lines[static_cast<size_t>(line_ids_.at(*connection_line))];
            bool breaker = false;
            for (int s : line_switches_[static_cast<size_t>(line_ids_.at(*connection_line))])
                if (switchgear[static_cast<size_t>(s)].kind == SwitchKind::circuit_breaker) breaker = true;
            if (!breaker) issue("missing_breaker", cl.id, "connection line carries no circuit breaker");
            bool from_mg = std::find(microgrid_buses.begin(), microgrid_buses.end(), cl.from_bus) != microgrid_buses.end();
            bool to_mg = std::find(microgrid_buses.begin(), microgrid_buses.end(), cl.to_bus) != microgrid_buses.end();
            if (from_mg == to_mg) issue("bad_placement", cl.id, "connection line must join the microgrid to the distribution system");
        }
        if (battery_bus && !bus_ids_.count(*battery_bus))
            issue("unknown_bus", *battery_bus, "battery bus does not exist");
    }

    return rep;
}

std::vector<SubSystem> RadialNetwork::find_sub_systems(const std::vector<bool>& failed_lines,
                                                       const std::vector<bool>& open_switchgear) const {
    std::vector<bool> line_out(lines.size(), false);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i < failed_lines.size() && failed_lines[i]) line_out[i] = true;
        for (int s : line_switches_[i])
            if (static_cast<size_t>(s) < open_switchgear.size() && open_switchgear[static_cast<size_t>(s)]) line_out[i] = true;
    }

    std::vector<int> component(buses.size(), -1);
    std::vector<SubSystem> subs;
    for (size_t start = 0; start < buses.size(); ++start) {
        if (component[start] >= 0) continue;
        int comp = static_cast<int>(subs.size());
        subs.emplace_back();
        SubSystem& sub = subs.back();
        std::deque<int> queue{static_cast<int>(start)};
        component[start] = comp;
        while (!queue.empty()) {
            int b = queue.front();
            queue.pop_front();
            sub.bus_idx.push_back(b);
            for (auto [line, other] : adjacency_[static_cast<size_t>(b)]) {
                if (line_out[static_cast<size_t>(line)]) continue;
                if (component[static_cast<size_t>(other)] < 0) {
                    component[static_cast<size_t>(other)] = comp;
                    queue.push_back(other);
                }
            }
        }
        std::sort(sub.bus_idx.begin(), sub.bus_idx.end());
    }
    for (size_t i = 0; i < lines.size(); ++i) {
        if (line_out[i]) continue;
        int f = bus_ids_.at(lines[i].from_bus);
        if (component[static_cast<size_t>(f)] >= 0)
            subs[static_cast<size_t>(component[static_cast<size_t>(f)])].line_idx.push_back(static_cast<int>(i));
    }
    for (auto& sub : subs) {
        std::sort(sub.line_idx.begin(), sub.line_idx.end());
        for (int b : sub.bus_idx) {
            if (b == slack_idx_) sub.contains_slack = true;
            if (buses[static_cast<size_t>(b)].generation_ref) sub.has_generation = true;
            if (battery_bus && buses[static_cast<size_t>(b)].id == *battery_bus) sub.has_battery = true;
        }
    }
    return subs;
}

std::vector<int> RadialNetwork::downstream_of(const std::string& line_id) const {
    int cut = line_index(line_id);
    if (slack_idx_ < 0) throw std::invalid_argument("network has no slack bus");
    std::vector<bool> visited(buses.size(), false);
    std::deque<int> queue{slack_idx_};
    visited[static_cast<size_t>(slack_idx_)] = true;
    while (!queue.empty()) {
        int b = queue.front();
        queue.pop_front();
        for (auto [line, other] : adjacency_[static_cast<size_t>(b)]) {
            if (line == cut) continue;
            if (!visited[static_cast<size_t>(other)]) {
                visited[static_cast<size_t>(other)] = true;
                queue.push_back(other);
            }
        }
    }
    std::vector<int> result;
    for (size_t i = 0; i < buses.size(); ++i)
        if (!visited[i]) result.push_back(static_cast<int>(i));
    return result;
}

}  // namespace gridrel
