// Command-line front end: simulation runs, the three studies, statistical
// tables over result files, load-flow inspection, and dataset validation.
//
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime failure.
// Progress goes to stderr; stdout carries machine-readable output when no
// --output-dir is given.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridrel/datasets.hpp"
#include "gridrel/engine.hpp"
#include "gridrel/experiments.hpp"
#include "gridrel/io.hpp"
#include "gridrel/power_flow.hpp"
#include "gridrel/profiles.hpp"
#include "gridrel/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridrel;

namespace {

// Raised for problems the user can fix in flags or input files (exit 1);
// anything else escaping a command handler is a runtime failure (exit 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string config_path;
    std::string network;
    int iterations = 0;
    bool iterations_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    bool workers_set = false;
    std::string output_dir;
    std::string format = "csv";
    bool plots = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_config = true) {
    if (with_config) cmd->add_option("config", o.config_path, "scenario config JSON file");
    cmd->add_option("--network", o.network, "embedded dataset id or network JSON file");
    cmd->add_option("--iterations", o.iterations, "Monte Carlo iterations (>= 1)")
        ->each([&](const std::string&) { o.iterations_set = true; });
    cmd->add_option("--seed", o.seed, "master random seed")->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--workers", o.workers, "worker threads (>= 1); never changes results")
        ->each([&](const std::string&) { o.workers_set = true; });
    cmd->add_option("--output-dir", o.output_dir, "directory for result files (stdout when absent)");
    cmd->add_option("--format", o.format, "stdout format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--plots", o.plots, "also write static SVG charts");
}

ScenarioConfig resolve_config(const CommonOpts& o) {
    ScenarioConfig cfg;
    if (!o.config_path.empty()) {
        try {
            cfg = load_config_file(o.config_path);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else {
        std::string id = o.network.empty() ? std::string("ieee33_mg") : o.network;
        if (!is_embedded_dataset(id))
            throw ConfigError("a config file is required when --network is not an embedded dataset id");
        cfg = default_config(id);
    }
    if (!o.network.empty()) cfg.network = o.network;
    if (const char* env = std::getenv("GRIDREL_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError("GRIDREL_SEED is not an unsigned integer: " + std::string(env));
        cfg.master_seed = static_cast<std::uint64_t>(v);
    }
    if (o.seed_set) cfg.master_seed = o.seed;
    if (o.iterations_set) {
        if (o.iterations < 1) throw ConfigError("--iterations must be >= 1");
        cfg.iterations = o.iterations;
    }
    if (o.workers_set) {
        if (o.workers < 1) throw ConfigError("--workers must be >= 1");
        cfg.workers = o.workers;
    }
    return cfg;
}

RadialNetwork resolve_network_checked(const std::string& id_or_path) {
    try {
        RadialNetwork net = resolve_network(id_or_path);
        auto report = net.validate();
        if (!report.ok()) {
            std::string msg = "network validation failed:";
            for (const auto& i : report.issues) msg += "\n  [" + i.code + "] " + i.component + ": " + i.message;
            throw ConfigError(msg);
        }
        return net;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

// Scratch directory for commands that print to stdout: the writers produce
// files, we echo the primary one and clean up.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gridrel-" + std::to_string(static_cast<unsigned long>(::getpid())) + "-scratch");
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void echo_file(const std::string& path) { std::fputs(read_text_file(path).c_str(), stdout); }

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const CommonOpts& o) {
    ScenarioConfig cfg = resolve_config(o);
    RadialNetwork net = resolve_network_checked(cfg.network);
    std::fprintf(stderr, "simulate: %d iterations on %s, seed %llu\n", cfg.iterations, cfg.network.c_str(),
                 static_cast<unsigned long long>(cfg.master_seed));
    ResultSet rs = run_simulation(net, cfg);
    std::fprintf(stderr, "simulate: done in %.2f s\n", rs.wall_seconds);
    if (!o.output_dir.empty()) {
        fs::create_directories(o.output_dir);
        int rows = write_results_csv(rs, o.output_dir + "/results.csv");
        write_summary_json(rs, o.output_dir + "/summary.json");
        write_manifest({{"results.csv", rows}, {"summary.json", 0}}, cfg.master_seed, o.output_dir + "/manifest.json");
    } else {
        TempDir tmp;
        if (o.format == "json") {
            write_summary_json(rs, (tmp.path / "summary.json").string());
            echo_file((tmp.path / "summary.json").string());
        } else {
            write_results_csv(rs, (tmp.path / "results.csv").string());
            echo_file((tmp.path / "results.csv").string());
        }
    }
    return 0;
}

// ---- scenarios / sensitivity / locate ------------------------------------

int cmd_scenarios(const CommonOpts& o) {
    ScenarioConfig cfg = resolve_config(o);
    RadialNetwork net = resolve_network_checked(cfg.network);
    std::fprintf(stderr, "scenarios: 3 runs x %d iterations, seed %llu\n", cfg.iterations,
                 static_cast<unsigned long long>(cfg.master_seed));
    if (!o.output_dir.empty()) {
        run_scenarios(net, cfg, o.output_dir, o.plots);
        return 0;
    }
    TempDir tmp;
    run_scenarios(net, cfg, tmp.path.string(), o.plots);
    echo_file((tmp.path / (o.format == "json" ? "scenarios/stats.json" : "scenarios/means.csv")).string());
    return 0;
}

int cmd_sensitivity(const CommonOpts& o) {
    ScenarioConfig cfg = resolve_config(o);
    RadialNetwork net = resolve_network_checked(cfg.network);
    FactorialLevels levels;
    std::fprintf(stderr, "sensitivity: %zu cells x %d iterations\n",
                 levels.battery_mwh.size() * levels.repair_quantile_h.size() * levels.failure_rate_per_km.size(),
                 cfg.iterations);
    if (!o.output_dir.empty()) {
        run_factorial(net, cfg, levels, o.output_dir, o.plots);
        return 0;
    }
    TempDir tmp;
    run_factorial(net, cfg, levels, tmp.path.string(), o.plots);
    echo_file((tmp.path / "factorial/cells.csv").string());
    return 0;
}

int cmd_locate(const CommonOpts& o) {
    ScenarioConfig cfg = resolve_config(o);
    RadialNetwork net = resolve_network_checked(cfg.network);
    std::fprintf(stderr, "locate: sweeping %zu candidate buses\n", net.distribution_buses.size());
    if (!o.output_dir.empty()) {
        run_location_sweep(net, cfg, o.output_dir, o.plots);
        return 0;
    }
    TempDir tmp;
    run_location_sweep(net, cfg, tmp.path.string(), o.plots);
    echo_file((tmp.path / "location/heatmap.csv").string());
    return 0;
}

// ---- stats ---------------------------------------------------------------

// Reads the per-iteration ENS column of results.csv files keyed by network.
std::map<std::string, std::vector<double>> load_ens_columns(const std::string& path) {
    std::map<std::string, std::vector<double>> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    std::istringstream hs(line);
    std::vector<std::string> header;
    for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
    int net_col = -1, ens_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "network") net_col = static_cast<int>(i);
        if (header[i] == "ENS_MWh") ens_col = static_cast<int>(i);
    }
    if (net_col < 0 || ens_col < 0)
        throw ConfigError(path + ": header must contain 'network' and 'ENS_MWh' columns");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::string> cells;
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        if (static_cast<int>(cells.size()) <= std::max(net_col, ens_col))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": short row");
        try {
            out[cells[static_cast<size_t>(net_col)]].push_back(std::stod(cells[static_cast<size_t>(ens_col)]));
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": ENS_MWh is not a number");
        }
    }
    return out;
}

int cmd_stats(const std::vector<std::string>& files, const CommonOpts& o) {
    if (files.size() < 2 || files.size() > 3) throw ConfigError("stats expects two or three result CSV files");
    std::vector<std::map<std::string, std::vector<double>>> cols;
    for (const auto& f : files) cols.push_back(load_ens_columns(f));

    std::vector<std::string> networks;
    for (const auto& [nw, v] : cols.front())
        if (!v.empty()) networks.push_back(nw);

    json jad = json::array();
    json jks = json::array();
    std::string ad_csv = "file,network,n,mean,stddev,a2,a2_adjusted,critical_value,reject_normality\n";
    std::string ks_csv = "network,file_a,file_b,d,p_value\n";
    for (size_t f = 0; f < files.size(); ++f)
        for (const auto& nw : networks) {
            auto it = cols[f].find(nw);
            if (it == cols[f].end()) continue;
            const auto& v = it->second;
            std::string row = files[f] + "," + nw + "," + std::to_string(v.size()) + ",";
            json entry{{"file", files[f]}, {"network", nw}, {"n", v.size()}};
            try {
                AdTestResult ad = anderson_darling_normality(v);
                row += format_double(ad.mean) + "," + format_double(ad.stddev) + "," + format_double(ad.a2) + "," +
                       format_double(ad.a2_adjusted) + "," + format_double(ad.critical_value) + "," +
                       (ad.reject_normality ? "true" : "false");
                entry["mean"] = ad.mean;
                entry["stddev"] = ad.stddev;
                entry["a2"] = ad.a2;
                entry["a2_adjusted"] = ad.a2_adjusted;
                entry["critical_value"] = ad.critical_value;
                entry["reject_normality"] = ad.reject_normality;
            } catch (const std::exception& e) {
                row += std::string(",,,,error: ") + e.what();
                entry["error"] = e.what();
            }
            ad_csv += row + "\n";
            jad.push_back(entry);
        }
    for (const auto& nw : networks)
        for (size_t a = 0; a < files.size(); ++a)
            for (size_t b = a + 1; b < files.size(); ++b) {
                auto ia = cols[a].find(nw);
                auto ib = cols[b].find(nw);
                if (ia == cols[a].end() || ib == cols[b].end()) continue;
                KsTestResult ks = ks_two_sample(ia->second, ib->second);
                ks_csv += nw + "," + files[a] + "," + files[b] + "," + format_double(ks.d) + "," +
                          format_double(ks.p_value) + "\n";
                jks.push_back(json{{"network", nw},
                                   {"file_a", files[a]},
                                   {"file_b", files[b]},
                                   {"d", ks.d},
                                   {"p_value", ks.p_value}});
            }

    if (!o.output_dir.empty()) {
        fs::create_directories(o.output_dir);
        write_text_file(o.output_dir + "/ad.csv", ad_csv);
        write_text_file(o.output_dir + "/ks.csv", ks_csv);
        write_text_file(o.output_dir + "/stats.json", json{{"anderson_darling", jad}, {"ks", jks}}.dump(2) + "\n");
    } else if (o.format == "json") {
        std::fputs((json{{"anderson_darling", jad}, {"ks", jks}}.dump(2) + "\n").c_str(), stdout);
    } else {
        std::fputs(("# anderson_darling\n" + ad_csv + "\n# kolmogorov_smirnov\n" + ks_csv).c_str(), stdout);
    }
    return 0;
}

// ---- loadflow / validate -------------------------------------------------

int cmd_loadflow(const CommonOpts& o) {
    std::string id = o.network.empty() ? std::string("ieee33") : o.network;
    ScenarioConfig cfg;
    if (!o.config_path.empty()) {
        try {
            cfg = load_config_file(o.config_path);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        if (o.network.empty()) id = cfg.network;
    } else if (is_embedded_dataset(id)) {
        cfg = default_config(id);
    }
    RadialNetwork net = resolve_network_checked(id);

    ProfileSet prof = generate_profiles(net, cfg.profiles, 1, cfg.master_seed);
    Injections inj;
    inj.p_pu.assign(net.buses.size(), 0.0);
    inj.q_pu.assign(net.buses.size(), 0.0);
    for (size_t b = 0; b < net.buses.size(); ++b) {
        if (net.buses[b].load_ref) {
            inj.p_pu[b] += prof.load_p(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
            inj.q_pu[b] += prof.load_q(*net.buses[b].load_ref, 0) / net.meta.s_base_mva;
        }
        if (net.buses[b].generation_ref) inj.p_pu[b] -= prof.gen_p(*net.buses[b].generation_ref, 0) / net.meta.s_base_mva;
    }
    auto subs = net.find_sub_systems(std::vector<bool>(net.lines.size(), false),
                                     std::vector<bool>(net.switchgear.size(), false));
    std::string csv;
    for (const auto& sub : subs) {
        if (sub.line_idx.empty() && sub.bus_idx.size() <= 1 && !sub.contains_slack) continue;
        int root = sub.contains_slack ? net.slack_index() : sub.bus_idx.front();
        FlowSolution flow = solve_fbs(net, sub, inj, root);
        if (!flow.converged) throw std::runtime_error("load flow did not converge");
        csv += flow_solution_csv(net, sub, flow);
    }
    if (!o.output_dir.empty()) {
        fs::create_directories(o.output_dir);
        write_text_file(o.output_dir + "/loadflow.csv", csv);
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    return 0;
}

int cmd_validate(const CommonOpts& o) {
    std::string id = o.network.empty() ? std::string("ieee33_mg") : o.network;
    resolve_network_checked(id);
    std::puts("valid");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential Monte Carlo reliability studies for radial distribution grids with a microgrid"};
    app.require_subcommand(1);

    CommonOpts o;
    std::vector<std::string> stats_files;

    CLI::App* simulate = app.add_subcommand("simulate", "run one Monte Carlo simulation");
    add_common(simulate, o);
    CLI::App* scenarios = app.add_subcommand("scenarios", "compare the three controller modes");
    add_common(scenarios, o);
    CLI::App* sensitivity = app.add_subcommand("sensitivity", "full-factorial sensitivity grid (limited support)");
    add_common(sensitivity, o);
    CLI::App* locate = app.add_subcommand("locate", "sweep the microgrid attachment bus");
    add_common(locate, o);
    CLI::App* stats = app.add_subcommand("stats", "normality and two-sample tests over result CSVs");
    stats->add_option("files", stats_files, "two or three results.csv files")->expected(2, 3);
    stats->add_option("--output-dir", o.output_dir, "directory for result files (stdout when absent)");
    stats->add_option("--format", o.format, "stdout format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    CLI::App* loadflow = app.add_subcommand("loadflow", "solve and print one load-flow operating point");
    add_common(loadflow, o);
    CLI::App* validate = app.add_subcommand("validate", "check a network file or embedded dataset");
    add_common(validate, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o);
        if (scenarios->parsed()) return cmd_scenarios(o);
        if (sensitivity->parsed()) return cmd_sensitivity(o);
        if (locate->parsed()) return cmd_locate(o);
        if (stats->parsed()) return cmd_stats(stats_files, o);
        if (loadflow->parsed()) return cmd_loadflow(o);
        if (validate->parsed()) return cmd_validate(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
