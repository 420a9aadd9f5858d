#include "gridrel/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridrel {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw std::runtime_error("schema violation: " + what); }

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) schema_error("missing field '" + std::string(key) + "' in " + where);
    return *it;
}

json repair_to_json(const RepairDist& d) {
    json j;
    if (d.kind == RepairDist::Kind::fixed) {
        j["fixed_hours"] = d.fixed_hours;
    } else {
        j["shape"] = d.gamma.shape;
        j["scale"] = d.gamma.scale;
    }
    return j;
}

RepairDist repair_from_json(const json& j, const std::string& where) {
    if (j.contains("fixed_hours")) return RepairDist::make_fixed(j.at("fixed_hours").get<double>());
    GammaSpec g;
    g.shape = need(j, "shape", where).get<double>();
    g.scale = need(j, "scale", where).get<double>();
    return RepairDist::make_gamma(g.shape, g.scale);
}

}  // namespace

RadialNetwork parse_network_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("parse error: ") + e.what());
    }

    RadialNetwork net;
    for (const auto& jb : need(j, "buses", "network")) {
        Bus b;
        b.id = need(jb, "id", "bus").get<std::string>();
        if (jb.contains("coordinates")) {
            const auto& c = jb.at("coordinates");
            if (!c.is_array() || c.size() != 2) schema_error("bus " + b.id + ": coordinates must be [x, y]");
            b.x = c[0].get<double>();
            b.y = c[1].get<double>();
        }
        if (jb.contains("load_ref") && !jb.at("load_ref").is_null()) b.load_ref = jb.at("load_ref").get<std::string>();
        if (jb.contains("generation_ref") && !jb.at("generation_ref").is_null())
            b.generation_ref = jb.at("generation_ref").get<std::string>();
        if (jb.contains("customer_count")) b.customer_count = jb.at("customer_count").get<int>();
        if (jb.contains("customer_category"))
            b.customer_category = customer_category_from_string(jb.at("customer_category").get<std::string>());
        net.buses.push_back(std::move(b));
    }

    for (const auto& jl : need(j, "lines", "network")) {
        Line l;
        l.id = need(jl, "id", "line").get<std::string>();
        l.from_bus = need(jl, "from_bus", "line " + l.id).get<std::string>();
        l.to_bus = need(jl, "to_bus", "line " + l.id).get<std::string>();
        l.resistance = need(jl, "resistance", "line " + l.id).get<double>();
        l.reactance = need(jl, "reactance", "line " + l.id).get<double>();
        l.length_km = need(jl, "length", "line " + l.id).get<double>();
        l.capacity_mw = need(jl, "capacity", "line " + l.id).get<double>();
        l.failure_rate_per_km = need(jl, "failure_rate_per_km", "line " + l.id).get<double>();
        l.repair_time_dist = repair_from_json(need(jl, "repair_time_dist", "line " + l.id), "line " + l.id);
        net.lines.push_back(std::move(l));
    }

    for (const auto& js : need(j, "switchgear", "network")) {
        Switchgear s;
        s.id = need(js, "id", "switchgear").get<std::string>();
        std::string kind = need(js, "kind", "switchgear " + s.id).get<std::string>();
        if (kind == "disconnector")
            s.kind = SwitchKind::disconnector;
        else if (kind == "circuit_breaker")
            s.kind = SwitchKind::circuit_breaker;
        else
            schema_error("switchgear " + s.id + ": unknown kind '" + kind + "'");
        s.host_line = need(js, "host_line", "switchgear " + s.id).get<std::string>();
        if (js.contains("host_bus")) s.host_bus = js.at("host_bus").get<std::string>();
        if (js.contains("state")) {
            std::string st = js.at("state").get<std::string>();
            if (st == "closed")
                s.normally_closed = true;
            else if (st == "open")
                s.normally_closed = false;
            else
                schema_error("switchgear " + s.id + ": unknown state '" + st + "'");
        }
        if (js.contains("sectioning_time")) s.sectioning_time_h = js.at("sectioning_time").get<double>();
        net.switchgear.push_back(std::move(s));
    }

    net.slack_bus = need(j, "slack_bus", "network").get<std::string>();

    const json& nets = need(j, "networks", "network");
    const json& dist = need(nets, "distribution_system", "networks");
    for (const auto& b : need(dist, "buses", "networks.distribution_system"))
        net.distribution_buses.push_back(b.get<std::string>());
    if (nets.contains("microgrid")) {
        const json& mg = nets.at("microgrid");
        for (const auto& b : need(mg, "buses", "networks.microgrid")) net.microgrid_buses.push_back(b.get<std::string>());
        net.connection_line = need(mg, "connection_line", "networks.microgrid").get<std::string>();
        if (mg.contains("battery_bus") && !mg.at("battery_bus").is_null())
            net.battery_bus = mg.at("battery_bus").get<std::string>();
    }

    if (j.contains("meta")) {
        const json& m = j.at("meta");
        if (m.contains("s_base_mva")) net.meta.s_base_mva = m.at("s_base_mva").get<double>();
        if (m.contains("v_base_kv")) net.meta.v_base_kv = m.at("v_base_kv").get<double>();
        if (m.contains("length_scale_km_per_ohm"))
            net.meta.length_scale_km_per_ohm = m.at("length_scale_km_per_ohm").get<double>();
    }

    net.build_index();
    auto report = net.validate();
    if (!report.ok()) {
        std::string msg = "network validation failed:";
        for (const auto& issue : report.issues) msg += "\n  [" + issue.code + "] " + issue.component + ": " + issue.message;
        throw std::runtime_error(msg);
    }
    return net;
}

std::string network_to_json_text(const RadialNetwork& net) {
    json j;
    j["buses"] = json::array();
    for (const auto& b : net.buses) {
        json jb;
        jb["id"] = b.id;
        jb["coordinates"] = {b.x, b.y};
        if (b.load_ref) jb["load_ref"] = *b.load_ref;
        if (b.generation_ref) jb["generation_ref"] = *b.generation_ref;
        jb["customer_count"] = b.customer_count;
        jb["customer_category"] = to_string(b.customer_category);
        j["buses"].push_back(std::move(jb));
    }
    j["lines"] = json::array();
    for (const auto& l : net.lines) {
        json jl;
        jl["id"] = l.id;
        jl["from_bus"] = l.from_bus;
        jl["to_bus"] = l.to_bus;
        jl["resistance"] = l.resistance;
        jl["reactance"] = l.reactance;
        jl["length"] = l.length_km;
        jl["capacity"] = l.capacity_mw;
        jl["failure_rate_per_km"] = l.failure_rate_per_km;
        jl["repair_time_dist"] = repair_to_json(l.repair_time_dist);
        j["lines"].push_back(std::move(jl));
    }
    j["switchgear"] = json::array();
    for (const auto& s : net.switchgear) {
        json js;
        js["id"] = s.id;
        js["kind"] = s.kind == SwitchKind::circuit_breaker ? "circuit_breaker" : "disconnector";
        js["host_line"] = s.host_line;
        if (!s.host_bus.empty()) js["host_bus"] = s.host_bus;
        js["state"] = s.normally_closed ? "closed" : "open";
        if (s.kind == SwitchKind::circuit_breaker) js["sectioning_time"] = s.sectioning_time_h;
        j["switchgear"].push_back(std::move(js));
    }
    j["slack_bus"] = net.slack_bus;
    j["networks"]["distribution_system"]["buses"] = net.distribution_buses;
    if (!net.microgrid_buses.empty()) {
        j["networks"]["microgrid"]["buses"] = net.microgrid_buses;
        if (net.connection_line) j["networks"]["microgrid"]["connection_line"] = *net.connection_line;
        if (net.battery_bus) j["networks"]["microgrid"]["battery_bus"] = *net.battery_bus;
    }
    j["meta"]["s_base_mva"] = net.meta.s_base_mva;
    j["meta"]["v_base_kv"] = net.meta.v_base_kv;
    j["meta"]["length_scale_km_per_ohm"] = net.meta.length_scale_km_per_ohm;
    return j.dump(2) + "\n";
}

RadialNetwork load_network_file(const std::string& path) {
    try {
        return parse_network_json(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_network_file(const RadialNetwork& net, const std::string& path) {
    write_text_file(path, network_to_json_text(net));
}

namespace {

const char* to_string(BatteryInitPolicy p) {
    switch (p) {
        case BatteryInitPolicy::uniform: return "uniform_random";
        case BatteryInitPolicy::full: return "full";
        default: return "auto";
    }
}

BatteryInitPolicy battery_policy_from_string(const std::string& s) {
    if (s == "uniform_random") return BatteryInitPolicy::uniform;
    if (s == "full") return BatteryInitPolicy::full;
    if (s == "auto") return BatteryInitPolicy::auto_mode;
    schema_error("unknown initial_soc_policy '" + s + "'");
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("parse error: ") + e.what());
    }

    ScenarioConfig cfg;
    if (j.contains("network")) cfg.network = j.at("network").get<std::string>();
    if (j.contains("microgrid_mode")) cfg.microgrid_mode = controller_mode_from_string(j.at("microgrid_mode").get<std::string>());
    if (j.contains("reserve_hours")) cfg.reserve_hours = j.at("reserve_hours").get<double>();
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
    if (j.contains("horizon_hours")) cfg.horizon_hours = j.at("horizon_hours").get<int>();
    if (j.contains("step_hours")) cfg.step_hours = j.at("step_hours").get<double>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("sectioning_time")) cfg.sectioning_time_h = j.at("sectioning_time").get<double>();
    if (j.contains("cens_costs"))
        for (auto it = j.at("cens_costs").begin(); it != j.at("cens_costs").end(); ++it)
            cfg.cens_cost[it.key()] = it.value().get<double>();
    if (j.contains("battery")) {
        const json& b = j.at("battery");
        if (b.contains("capacity_mwh")) cfg.battery.capacity_mwh = b.at("capacity_mwh").get<double>();
        if (b.contains("inverter_mw")) cfg.battery.inverter_mw = b.at("inverter_mw").get<double>();
        if (b.contains("efficiency")) cfg.battery.efficiency = b.at("efficiency").get<double>();
        if (b.contains("min_soc")) cfg.battery.min_soc = b.at("min_soc").get<double>();
        if (b.contains("initial_soc_policy"))
            cfg.battery_initial = battery_policy_from_string(b.at("initial_soc_policy").get<std::string>());
    }
    if (j.contains("profiles")) {
        const json& p = j.at("profiles");
        if (p.contains("power_factor")) cfg.profiles.power_factor = p.at("power_factor").get<double>();
        if (p.contains("flat_loads")) cfg.profiles.flat_loads = p.at("flat_loads").get<bool>();
        if (p.contains("combined_renewable_peak_mw"))
            cfg.profiles.combined_renewable_peak_mw = p.at("combined_renewable_peak_mw").get<double>();
        if (p.contains("wind_curve")) {
            const json& w = p.at("wind_curve");
            if (w.contains("cut_in_ms")) cfg.profiles.wind_curve.cut_in_ms = w.at("cut_in_ms").get<double>();
            if (w.contains("rated_ms")) cfg.profiles.wind_curve.rated_ms = w.at("rated_ms").get<double>();
            if (w.contains("cut_out_ms")) cfg.profiles.wind_curve.cut_out_ms = w.at("cut_out_ms").get<double>();
        }
        if (p.contains("loads"))
            for (auto it = p.at("loads").begin(); it != p.at("loads").end(); ++it) {
                LoadSpec ls;
                ls.peak_mw = need(it.value(), "peak_mw", "load " + it.key()).get<double>();
                if (it.value().contains("peak_mvar")) ls.peak_mvar = it.value().at("peak_mvar").get<double>();
                cfg.profiles.loads[it.key()] = ls;
            }
        if (p.contains("generation"))
            for (auto it = p.at("generation").begin(); it != p.at("generation").end(); ++it) {
                GenerationUnitSpec g;
                std::string kind = need(it.value(), "kind", "generation " + it.key()).get<std::string>();
                if (kind == "wind")
                    g.kind = GenKind::wind;
                else if (kind == "solar")
                    g.kind = GenKind::solar;
                else
                    schema_error("generation " + it.key() + ": unknown kind '" + kind + "'");
                g.rated_mw = need(it.value(), "rated_mw", "generation " + it.key()).get<double>();
                cfg.profiles.generation[it.key()] = g;
            }
        if (p.contains("weather_csv") && !p.at("weather_csv").is_null())
            cfg.profiles.weather_csv = p.at("weather_csv").get<std::string>();
    }
    if (j.contains("failure_rate_override_per_km") && !j.at("failure_rate_override_per_km").is_null())
        cfg.failure_rate_override_per_km = j.at("failure_rate_override_per_km").get<double>();
    if (j.contains("repair_quantile_hours") && !j.at("repair_quantile_hours").is_null())
        cfg.repair_quantile_hours = j.at("repair_quantile_hours").get<double>();
    if (j.contains("repair_quantile_prob")) cfg.repair_quantile_prob = j.at("repair_quantile_prob").get<double>();
    if (j.contains("feeder_capacity_mw")) cfg.feeder_capacity_mw = j.at("feeder_capacity_mw").get<double>();
    if (j.contains("forced_failures"))
        for (const auto& f : j.at("forced_failures")) {
            ForcedFailure ff;
            ff.line = need(f, "line", "forced_failures").get<std::string>();
            ff.hour = need(f, "hour", "forced_failures").get<int>();
            ff.repair_hours = need(f, "repair_hours", "forced_failures").get<double>();
            cfg.forced_failures.push_back(std::move(ff));
        }
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();

    if (cfg.iterations <= 0) schema_error("iterations must be positive");
    if (cfg.horizon_hours <= 0) schema_error("horizon_hours must be positive");
    if (cfg.step_hours <= 0.0) schema_error("step_hours must be positive");
    return cfg;
}

std::string config_to_json_text(const ScenarioConfig& cfg) {
    json j;
    j["network"] = cfg.network;
    j["microgrid_mode"] = to_string(cfg.microgrid_mode);
    j["reserve_hours"] = cfg.reserve_hours;
    j["iterations"] = cfg.iterations;
    j["horizon_hours"] = cfg.horizon_hours;
    j["step_hours"] = cfg.step_hours;
    j["master_seed"] = cfg.master_seed;
    if (cfg.sectioning_time_h) j["sectioning_time"] = *cfg.sectioning_time_h;
    for (const auto& [k, v] : cfg.cens_cost) j["cens_costs"][k] = v;
    j["battery"]["capacity_mwh"] = cfg.battery.capacity_mwh;
    j["battery"]["inverter_mw"] = cfg.battery.inverter_mw;
    j["battery"]["efficiency"] = cfg.battery.efficiency;
    j["battery"]["min_soc"] = cfg.battery.min_soc;
    j["battery"]["initial_soc_policy"] = to_string(cfg.battery_initial);
    j["profiles"]["power_factor"] = cfg.profiles.power_factor;
    j["profiles"]["flat_loads"] = cfg.profiles.flat_loads;
    j["profiles"]["combined_renewable_peak_mw"] = cfg.profiles.combined_renewable_peak_mw;
    j["profiles"]["wind_curve"]["cut_in_ms"] = cfg.profiles.wind_curve.cut_in_ms;
    j["profiles"]["wind_curve"]["rated_ms"] = cfg.profiles.wind_curve.rated_ms;
    j["profiles"]["wind_curve"]["cut_out_ms"] = cfg.profiles.wind_curve.cut_out_ms;
    j["profiles"]["loads"] = json::object();
    for (const auto& [k, v] : cfg.profiles.loads) {
        j["profiles"]["loads"][k]["peak_mw"] = v.peak_mw;
        if (v.peak_mvar) j["profiles"]["loads"][k]["peak_mvar"] = *v.peak_mvar;
    }
    j["profiles"]["generation"] = json::object();
    for (const auto& [k, v] : cfg.profiles.generation) {
        j["profiles"]["generation"][k]["kind"] = v.kind == GenKind::wind ? "wind" : "solar";
        j["profiles"]["generation"][k]["rated_mw"] = v.rated_mw;
    }
    if (cfg.profiles.weather_csv) j["profiles"]["weather_csv"] = *cfg.profiles.weather_csv;
    if (cfg.failure_rate_override_per_km) j["failure_rate_override_per_km"] = *cfg.failure_rate_override_per_km;
    if (cfg.repair_quantile_hours) j["repair_quantile_hours"] = *cfg.repair_quantile_hours;
    j["repair_quantile_prob"] = cfg.repair_quantile_prob;
    j["feeder_capacity_mw"] = cfg.feeder_capacity_mw;
    if (!cfg.forced_failures.empty()) {
        j["forced_failures"] = json::array();
        for (const auto& f : cfg.forced_failures)
            j["forced_failures"].push_back({{"line", f.line}, {"hour", f.hour}, {"repair_hours", f.repair_hours}});
    }
    j["workers"] = cfg.workers;
    return j.dump(2) + "\n";
}

ScenarioConfig load_config_file(const std::string& path) {
    try {
        return parse_config_json(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_config_file(const ScenarioConfig& cfg, const std::string& path) {
    write_text_file(path, config_to_json_text(cfg));
}

int write_results_csv(const ResultSet& rs, const std::string& path) {
    std::string out = "iteration,network,ENS_MWh,CENS,SAIFI,SAIDI_h,CAIDI_h\n";
    int rows = 0;
    for (const auto& r : rs.rows) {
        out += std::to_string(r.iteration) + ",distribution_system," + format_double(r.distribution.ens_mwh) + "," +
               format_double(r.distribution.cens) + "," + format_double(r.distribution.saifi) + "," +
               format_double(r.distribution.saidi_h) + "," + format_double(r.distribution.caidi_h) + "\n";
        ++rows;
        if (r.has_microgrid) {
            out += std::to_string(r.iteration) + ",microgrid," + format_double(r.microgrid.ens_mwh) + "," +
                   format_double(r.microgrid.cens) + "," + format_double(r.microgrid.saifi) + "," +
                   format_double(r.microgrid.saidi_h) + "," + format_double(r.microgrid.caidi_h) + "\n";
            ++rows;
        }
    }
    write_text_file(path, out);
    return rows;
}

namespace {

json index_summary(const std::vector<IterationResult>& rows, bool microgrid) {
    auto pick = [&](auto get) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(get(microgrid ? r.microgrid : r.distribution));
        return v;
    };
    auto describe = [](const std::vector<double>& v) {
        json d;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean = v.empty() ? 0.0 : mean / static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        d["mean"] = mean;
        d["stddev"] = sd;
        return d;
    };
    json s;
    s["ENS_MWh"] = describe(pick([](const IndexReport& r) { return r.ens_mwh; }));
    s["CENS"] = describe(pick([](const IndexReport& r) { return r.cens; }));
    s["SAIFI"] = describe(pick([](const IndexReport& r) { return r.saifi; }));
    s["SAIDI_h"] = describe(pick([](const IndexReport& r) { return r.saidi_h; }));
    s["CAIDI_h"] = describe(pick([](const IndexReport& r) { return r.caidi_h; }));
    s["lambda_s"] = describe(pick([](const IndexReport& r) { return r.lambda_s; }));
    s["U_s_h"] = describe(pick([](const IndexReport& r) { return r.u_s_h; }));
    return s;
}

}  // namespace

void write_summary_json(const ResultSet& rs, const std::string& path) {
    json j;
    // Deliberately excludes wall time: identical seeds must give
    // byte-identical result files.
    j["iterations"] = rs.rows.size();
    j["master_seed"] = rs.master_seed;
    j["distribution_system"] = index_summary(rs.rows, false);
    bool has_mg = !rs.rows.empty() && rs.rows.front().has_microgrid;
    if (has_mg) j["microgrid"] = index_summary(rs.rows, true);
    j["convergence"]["running_mean_dist_ENS"] = rs.running_mean_dist_ens;
    if (has_mg) j["convergence"]["running_mean_mg_ENS"] = rs.running_mean_mg_ens;
    int not_conv = 0, infeasible = 0, errors = 0;
    for (const auto& r : rs.rows) {
        not_conv += r.fbs_not_converged;
        infeasible += r.lp_infeasible;
        errors += r.lp_errors;
    }
    j["diagnostics"]["load_flow_not_converged"] = not_conv;
    j["diagnostics"]["shedding_infeasible"] = infeasible;
    j["diagnostics"]["shedding_errors"] = errors;
    write_text_file(path, j.dump(2) + "\n");
}

void write_manifest(const std::vector<ManifestEntry>& files, std::uint64_t master_seed, const std::string& path) {
    json j;
    j["master_seed"] = master_seed;
    j["files"] = json::array();
    for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"rows", f.rows}});
    write_text_file(path, j.dump(2) + "\n");
}

std::string flow_solution_csv(const RadialNetwork& net, const SubSystem& sub, const FlowSolution& flow) {
    std::string out = "bus,v_pu,delta_rad\n";
    for (int b : sub.bus_idx)
        out += net.buses[static_cast<size_t>(b)].id + "," + format_double(flow.v_pu[static_cast<size_t>(b)]) + "," +
               format_double(flow.delta_rad[static_cast<size_t>(b)]) + "\n";
    out += "\nline,from_bus,to_bus,p_pu,q_pu\n";
    for (int l : sub.line_idx) {
        const Line& ln = net.lines[static_cast<size_t>(l)];
        out += ln.id + "," + ln.from_bus + "," + ln.to_bus + "," + format_double(flow.line_p_pu[static_cast<size_t>(l)]) +
               "," + format_double(flow.line_q_pu[static_cast<size_t>(l)]) + "\n";
    }
    out += "\nconverged,iterations,loss_p_pu,loss_q_pu,root_p_pu,root_q_pu,balance_residual_pu\n";
    out += std::string(flow.converged ? "1" : "0") + "," + std::to_string(flow.iterations) + "," +
           format_double(flow.loss_p_pu) + "," + format_double(flow.loss_q_pu) + "," +
           format_double(flow.root_injection_p_pu) + "," + format_double(flow.root_injection_q_pu) + "," +
           format_double(flow.balance_residual_pu) + "\n";
    return out;
}

}  // namespace gridrel
