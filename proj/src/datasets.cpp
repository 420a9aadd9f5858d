#include "gridrel/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridrel/io.hpp"

namespace gridrel {

namespace {

// Canonical 33-bus feeder branch data: from, to, R and X in ohm, and the
// active/reactive load at the receiving bus in kW / kvar.
struct BranchRow {
    int from;
    int to;
    double r_ohm;
    double x_ohm;
    double p_kw;
    double q_kvar;
};

constexpr BranchRow kBranches[] = {
    {1, 2, 0.0922, 0.0470, 100, 60},  {2, 3, 0.4930, 0.2511, 90, 40},   {3, 4, 0.3660, 0.1864, 120, 80},
    {4, 5, 0.3811, 0.1941, 60, 30},   {5, 6, 0.8190, 0.7070, 60, 20},   {6, 7, 0.1872, 0.6188, 200, 100},
    {7, 8, 0.7114, 0.2351, 200, 100}, {8, 9, 1.0300, 0.7400, 60, 20},   {9, 10, 1.0440, 0.7400, 60, 20},
    {10, 11, 0.1966, 0.0650, 45, 30}, {11, 12, 0.3744, 0.1238, 60, 35}, {12, 13, 1.4680, 1.1550, 60, 35},
    {13, 14, 0.5416, 0.7129, 120, 80}, {14, 15, 0.5910, 0.5260, 60, 10}, {15, 16, 0.7463, 0.5450, 60, 20},
    {16, 17, 1.2890, 1.7210, 60, 20}, {17, 18, 0.7320, 0.5740, 90, 40}, {2, 19, 0.1640, 0.1565, 90, 40},
    {19, 20, 1.5042, 1.3554, 90, 40}, {20, 21, 0.4095, 0.4784, 90, 40}, {21, 22, 0.7089, 0.9373, 90, 40},
    {3, 23, 0.4512, 0.3083, 90, 50},  {23, 24, 0.8980, 0.7091, 420, 200}, {24, 25, 0.8960, 0.7011, 420, 200},
    {6, 26, 0.2030, 0.1034, 60, 25},  {26, 27, 0.2842, 0.1447, 60, 25}, {27, 28, 1.0590, 0.9337, 60, 20},
    {28, 29, 0.8042, 0.7006, 120, 70}, {29, 30, 0.5075, 0.2585, 200, 600}, {30, 31, 0.9744, 0.9630, 150, 70},
    {31, 32, 0.3105, 0.3619, 210, 100}, {32, 33, 0.3410, 0.5302, 60, 40}};

struct CustomerRow {
    int bus;
    CustomerCategory category;
    int count;
};

constexpr CustomerRow kCustomers[] = {
    {2, CustomerCategory::household, 50},  {3, CustomerCategory::household, 45}, {4, CustomerCategory::trade, 10},
    {5, CustomerCategory::household, 30},  {6, CustomerCategory::household, 30}, {7, CustomerCategory::industry, 4},
    {8, CustomerCategory::industry, 4},    {9, CustomerCategory::household, 30}, {10, CustomerCategory::household, 30},
    {11, CustomerCategory::farm, 6},       {12, CustomerCategory::household, 30}, {13, CustomerCategory::household, 30},
    {14, CustomerCategory::trade, 8},      {15, CustomerCategory::household, 30}, {16, CustomerCategory::household, 30},
    {17, CustomerCategory::farm, 8},       {18, CustomerCategory::household, 45}, {19, CustomerCategory::household, 45},
    {20, CustomerCategory::office, 6},     {21, CustomerCategory::household, 45}, {22, CustomerCategory::household, 45},
    {23, CustomerCategory::farm, 12},      {24, CustomerCategory::industry, 6},  {25, CustomerCategory::industry, 6},
    {26, CustomerCategory::household, 30}, {27, CustomerCategory::household, 30}, {28, CustomerCategory::farm, 8},
    {29, CustomerCategory::trade, 10},     {30, CustomerCategory::office, 12},   {31, CustomerCategory::trade, 12},
    {32, CustomerCategory::industry, 5},   {33, CustomerCategory::household, 30}};

constexpr double kSBaseMva = 10.0;
constexpr double kVBaseKv = 12.66;
constexpr double kLengthScaleKmPerOhm = 3.0;
constexpr double kFailuresPerKmYear = 0.07;
// Shape < 2 gives the repair distribution a heavy right tail: most faults are
// fixed within a couple of hours, a few take the better part of a day. The
// long repairs dominate island-mode energy shortfalls.
constexpr double kRepairShape = 1.2;
constexpr double kRepairQuantileHours = 2.0;
constexpr double kRepairQuantileProb = 0.67;
constexpr double kSectioningHours = 1.0;

double z_base_ohm() { return kVBaseKv * kVBaseKv / kSBaseMva; }

std::string bus_id(int n) { return "B" + std::to_string(n); }
std::string line_id(int n) { return "L" + std::to_string(n); }

void add_disconnectors(RadialNetwork& net, const Line& line) {
    Switchgear a;
    a.id = "D" + line.id + "a";
    a.kind = SwitchKind::disconnector;
    a.host_line = line.id;
    a.host_bus = line.from_bus;
    net.switchgear.push_back(a);
    Switchgear b;
    b.id = "D" + line.id + "b";
    b.kind = SwitchKind::disconnector;
    b.host_line = line.id;
    b.host_bus = line.to_bus;
    net.switchgear.push_back(b);
}

// Schematic layout: the trunk runs along x, laterals are offset in y.
void assign_coordinates(RadialNetwork& net) {
    auto place = [&](const std::string& id, double x, double y) {
        for (auto& b : net.buses)
            if (b.id == id) {
                b.x = x;
                b.y = y;
                return;
            }
    };
    for (int n = 1; n <= 18; ++n) place(bus_id(n), static_cast<double>(n - 1), 0.0);
    for (int n = 19; n <= 22; ++n) place(bus_id(n), static_cast<double>(n - 17), 1.5);
    for (int n = 23; n <= 25; ++n) place(bus_id(n), static_cast<double>(n - 21), -1.5);
    for (int n = 26; n <= 33; ++n) place(bus_id(n), static_cast<double>(n - 20), -3.0);
    place("M1", 14.0, -4.5);
    place("M2", 13.0, -5.5);
    place("M3", 15.0, -5.5);
}

RadialNetwork make_ieee33(bool doubled_loads) {
    RadialNetwork net;
    const double zb = z_base_ohm();
    const double load_scale = doubled_loads ? 2.0 : 1.0;
    const GammaSpec repair_spec = calibrate_gamma(kRepairShape, kRepairQuantileHours, kRepairQuantileProb);
    const RepairDist repair = RepairDist::make_gamma(repair_spec.shape, repair_spec.scale);

    double total_p_mw = 0.0;
    for (const auto& row : kBranches) total_p_mw += load_scale * row.p_kw / 1000.0;
    // Feeder lines are dimensioned with headroom above system peak, so
    // transfer limits only bind in engineered test cases.
    const double dist_capacity_mw = std::ceil(1.5 * (total_p_mw + 4.5));

    for (int n = 1; n <= 33; ++n) {
        Bus b;
        b.id = bus_id(n);
        if (n > 1) b.load_ref = "LD" + std::to_string(n);
        net.buses.push_back(std::move(b));
    }
    for (const auto& row : kCustomers) {
        Bus& b = net.buses[static_cast<size_t>(row.bus - 1)];
        b.customer_count = row.count;
        b.customer_category = row.category;
    }

    int idx = 1;
    for (const auto& row : kBranches) {
        Line l;
        l.id = line_id(idx++);
        l.from_bus = bus_id(row.from);
        l.to_bus = bus_id(row.to);
        l.resistance = row.r_ohm / zb;
        l.reactance = row.x_ohm / zb;
        l.length_km = std::hypot(row.r_ohm, row.x_ohm) * kLengthScaleKmPerOhm;
        l.capacity_mw = dist_capacity_mw;
        l.failure_rate_per_km = kFailuresPerKmYear;
        l.repair_time_dist = repair;
        net.lines.push_back(std::move(l));
    }

    Switchgear cb;
    cb.id = "CB1";
    cb.kind = SwitchKind::circuit_breaker;
    cb.host_line = "L1";
    cb.host_bus = "B1";
    cb.sectioning_time_h = kSectioningHours;
    net.switchgear.push_back(cb);
    for (const auto& l : net.lines) add_disconnectors(net, l);

    net.slack_bus = "B1";
    for (int n = 1; n <= 33; ++n) net.distribution_buses.push_back(bus_id(n));
    net.meta.s_base_mva = kSBaseMva;
    net.meta.v_base_kv = kVBaseKv;
    net.meta.length_scale_km_per_ohm = kLengthScaleKmPerOhm;
    return net;
}

void attach_microgrid(RadialNetwork& net, const std::string& at_bus) {
    const double zb = z_base_ohm();
    const GammaSpec repair_spec = calibrate_gamma(kRepairShape, kRepairQuantileHours, kRepairQuantileProb);
    const RepairDist repair = RepairDist::make_gamma(repair_spec.shape, repair_spec.scale);

    Bus m1;
    m1.id = "M1";
    Bus m2;
    m2.id = "M2";
    m2.generation_ref = "GWIND";
    Bus m3;
    m3.id = "M3";
    m3.generation_ref = "GSOLAR";
    m3.load_ref = "LDM3";
    m3.customer_count = 40;
    m3.customer_category = CustomerCategory::household;
    net.buses.push_back(std::move(m1));
    net.buses.push_back(std::move(m2));
    net.buses.push_back(std::move(m3));

    auto make_mg_line = [&](const std::string& id, const std::string& from, const std::string& to, double cap) {
        Line l;
        l.id = id;
        l.from_bus = from;
        l.to_bus = to;
        l.resistance = 0.0922 / zb;
        l.reactance = 0.0470 / zb;
        l.length_km = std::hypot(0.0922, 0.0470) * kLengthScaleKmPerOhm;
        l.capacity_mw = cap;
        l.failure_rate_per_km = kFailuresPerKmYear;
        l.repair_time_dist = repair;
        return l;
    };
    net.lines.push_back(make_mg_line("ML1", at_bus, "M1", 6.0));
    net.lines.push_back(make_mg_line("ML2", "M1", "M2", 3.0));
    net.lines.push_back(make_mg_line("ML3", "M1", "M3", 3.0));

    Switchgear cb;
    cb.id = "CB2";
    cb.kind = SwitchKind::circuit_breaker;
    cb.host_line = "ML1";
    cb.host_bus = "M1";
    cb.sectioning_time_h = kSectioningHours;
    net.switchgear.push_back(cb);
    for (const auto& id : {"ML1", "ML2", "ML3"})
        for (const auto& l : net.lines)
            if (l.id == id) add_disconnectors(net, l);

    net.microgrid_buses = {"M1", "M2", "M3"};
    net.connection_line = "ML1";
    net.battery_bus = "M1";
}

}  // namespace

std::vector<std::string> embedded_dataset_ids() { return {"ieee33", "ieee33_mg"}; }

bool is_embedded_dataset(const std::string& id) {
    auto ids = embedded_dataset_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

RadialNetwork make_network(const std::string& id) {
    if (id == "ieee33") {
        RadialNetwork net = make_ieee33(false);
        assign_coordinates(net);
        net.build_index();
        return net;
    }
    if (id == "ieee33_mg") {
        RadialNetwork net = make_ieee33(true);
        attach_microgrid(net, "B33");
        assign_coordinates(net);
        net.build_index();
        return net;
    }
    throw std::invalid_argument("unknown embedded dataset: " + id);
}

ScenarioConfig default_config(const std::string& id) {
    if (!is_embedded_dataset(id)) throw std::invalid_argument("unknown embedded dataset: " + id);
    ScenarioConfig cfg;
    cfg.network = id;
    cfg.microgrid_mode = ControllerMode::full_support;
    cfg.reserve_hours = 4.0;
    cfg.iterations = 5000;
    cfg.horizon_hours = 8760;
    cfg.step_hours = 1.0;
    cfg.master_seed = 1;
    cfg.cens_cost = {{"household", 10.0}, {"farm", 25.0}, {"office", 60.0}, {"trade", 80.0}, {"industry", 100.0}};
    cfg.battery = BatterySpec{};  // 1 MWh, 0.5 MW, 0.95, 0.1
    cfg.repair_quantile_prob = kRepairQuantileProb;

    const double load_scale = id == "ieee33" ? 1.0 : 2.0;
    cfg.profiles.flat_loads = id == "ieee33";
    cfg.profiles.power_factor = 0.95;
    for (const auto& row : kBranches) {
        LoadSpec spec;
        spec.peak_mw = load_scale * row.p_kw / 1000.0;
        if (id == "ieee33") spec.peak_mvar = row.q_kvar / 1000.0;
        cfg.profiles.loads["LD" + std::to_string(row.to)] = spec;
    }
    if (id == "ieee33_mg") {
        cfg.profiles.loads["LDM3"] = LoadSpec{0.2, std::nullopt};
        cfg.profiles.generation["GWIND"] = GenerationUnitSpec{GenKind::wind, 2.0};
        cfg.profiles.generation["GSOLAR"] = GenerationUnitSpec{GenKind::solar, 1.5};
        cfg.profiles.combined_renewable_peak_mw = 3.5;
    }
    return cfg;
}

RadialNetwork resolve_network(const std::string& id_or_path) {
    if (is_embedded_dataset(id_or_path)) return make_network(id_or_path);
    return load_network_file(id_or_path);
}

RadialNetwork reattach_microgrid(const RadialNetwork& base, const std::string& bus_id) {
    if (!base.connection_line) throw std::invalid_argument("network has no microgrid to move");
    RadialNetwork net = base;
    if (!net.has_bus(bus_id)) throw std::invalid_argument("unknown bus: " + bus_id);
    for (const auto& mb : net.microgrid_buses)
        if (mb == bus_id) throw std::invalid_argument("bus is inside the microgrid: " + bus_id);

    std::string old_host;
    for (auto& l : net.lines)
        if (l.id == *net.connection_line) {
            bool from_is_mg = false;
            for (const auto& mb : net.microgrid_buses)
                if (mb == l.from_bus) from_is_mg = true;
            if (from_is_mg) {
                old_host = l.to_bus;
                l.to_bus = bus_id;
            } else {
                old_host = l.from_bus;
                l.from_bus = bus_id;
            }
        }
    // Switchgear sitting on the moved end follows the line.
    for (auto& sw : net.switchgear)
        if (sw.host_line == *net.connection_line && sw.host_bus == old_host) sw.host_bus = bus_id;
    // Keep the plot layout readable: park the microgrid next to its new host.
    double hx = 0.0, hy = 0.0;
    for (const auto& b : net.buses)
        if (b.id == bus_id) {
            hx = b.x;
            hy = b.y;
        }
    for (auto& b : net.buses) {
        if (b.id == "M1") {
            b.x = hx;
            b.y = hy - 1.5;
        } else if (b.id == "M2") {
            b.x = hx - 1.0;
            b.y = hy - 2.5;
        } else if (b.id == "M3") {
            b.x = hx + 1.0;
            b.y = hy - 2.5;
        }
    }
    net.build_index();
    return net;
}

}  // namespace gridrel
