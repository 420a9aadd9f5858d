// Study drivers: scenario comparison, factorial sensitivity grid, and the
// microgrid placement sweep, including their file outputs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridrel/datasets.hpp"
#include "gridrel/experiments.hpp"
#include "gridrel/io.hpp"
#include "gridrel/stats.hpp"

using namespace gridrel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::map<std::string, std::string> snapshot_tree(const std::string& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), root).string()] = read_text_file(entry.path().string());
    return files;
}

ScenarioConfig quick_config(int iterations, int horizon) {
    ScenarioConfig cfg = default_config("ieee33_mg");
    cfg.iterations = iterations;
    cfg.horizon_hours = horizon;
    cfg.master_seed = 424242;
    return cfg;
}

}  // namespace

TEST_CASE("zero failure rate collapses the three scenarios onto each other") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = quick_config(4, 300);
    cfg.failure_rate_override_per_km = 0.0;
    const std::string dir = fresh_dir("gridrel_exp_zero");

    ScenarioStudyResult res = run_scenarios(net, cfg, dir);
    REQUIRE(res.s1.rows.size() == 4);
    REQUIRE(res.s2.rows.size() == 4);
    REQUIRE(res.s3.rows.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(res.s1.rows[i].distribution.ens_mwh == 0.0);
        CHECK(res.s1.rows[i].microgrid.ens_mwh == 0.0);
        CHECK(res.s2.rows[i].distribution.ens_mwh == 0.0);
        CHECK(res.s3.rows[i].distribution.ens_mwh == 0.0);
    }

    // Identical all-zero samples: KS distance 0, p-value 1; the normality
    // test cannot run on a degenerate sample and must say so instead.
    json stats = json::parse(read_text_file(dir + "/scenarios/stats.json"));
    for (const char* key : {"s1_vs_s2", "s1_vs_s3", "s2_vs_s3"}) {
        CAPTURE(key);
        CHECK(stats["ks"]["distribution_system"][key]["d"].get<double>() == 0.0);
        CHECK(stats["ks"]["distribution_system"][key]["p_value"].get<double>() == 1.0);
        CHECK(stats["ks"]["microgrid"][key]["d"].get<double>() == 0.0);
    }
    CHECK(stats["anderson_darling"]["s1"]["distribution_system"]["ENS_MWh"].contains("error"));
    CHECK(stats["means"]["distribution_system"]["s1"].get<double>() == 0.0);
    CHECK(stats["reductions_percent"]["distribution_system"]["s2_vs_s1"].get<double>() == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("scenario study writes every advertised file with consistent row counts") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = quick_config(3, 700);
    cfg.failure_rate_override_per_km = 0.6;  // a few events per year-fragment
    const std::string dir = fresh_dir("gridrel_exp_files");

    ScenarioStudyResult res = run_scenarios(net, cfg, dir, /*plots=*/true);

    for (const char* rel :
         {"scenarios/s1/results.csv", "scenarios/s1/summary.json", "scenarios/s2/results.csv",
          "scenarios/s2/summary.json", "scenarios/s3/results.csv", "scenarios/s3/summary.json", "scenarios/means.csv",
          "scenarios/boxplot.csv", "scenarios/stats.json", "scenarios/report.txt", "scenarios/boxplot_distribution.svg",
          "scenarios/boxplot_microgrid.svg", "manifest.json"}) {
        CAPTURE(rel);
        CHECK(fs::exists(fs::path(dir) / rel));
    }

    json man = json::parse(read_text_file(dir + "/manifest.json"));
    CHECK(man["master_seed"].get<std::uint64_t>() == cfg.master_seed);
    std::map<std::string, int> rows;
    for (const auto& f : man["files"]) rows[f["path"].get<std::string>()] = f["rows"].get<int>();
    // Each iteration contributes a distribution row and a microgrid row.
    CHECK(rows["scenarios/s1/results.csv"] == 6);
    CHECK(rows["scenarios/s2/results.csv"] == 6);
    CHECK(rows["scenarios/s3/results.csv"] == 6);
    CHECK(rows["scenarios/means.csv"] == 6);
    CHECK(rows["scenarios/boxplot.csv"] == 6);
    for (const auto& [rel, n] : rows) {
        if (rel.size() >= 4 && rel.substr(rel.size() - 4) == ".csv") {
            CAPTURE(rel);
            CHECK(count_lines(read_text_file(dir + "/" + rel)) == n + 1);  // header
        }
    }

    // The statistics table must carry every advertised block with sane values.
    json stats = json::parse(read_text_file(dir + "/scenarios/stats.json"));
    for (const char* s : {"s1", "s2", "s3"})
        CHECK(stats["anderson_darling"][s]["distribution_system"].contains("ENS_MWh"));
    for (const char* key : {"s1_vs_s2", "s1_vs_s3", "s2_vs_s3"}) {
        double d = stats["ks"]["distribution_system"][key]["d"].get<double>();
        double p = stats["ks"]["distribution_system"][key]["p_value"].get<double>();
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    // Means in the table must match the returned result sets.
    auto mean_ens = [](const ResultSet& rs) {
        std::vector<double> v;
        for (const auto& r : rs.rows) v.push_back(r.distribution.ens_mwh);
        return sample_mean(v);
    };
    CHECK(stats["means"]["distribution_system"]["s1"].get<double>() == doctest::Approx(mean_ens(res.s1)).epsilon(1e-12));
    CHECK(stats["means"]["distribution_system"]["s2"].get<double>() == doctest::Approx(mean_ens(res.s2)).epsilon(1e-12));
    CHECK(stats["means"]["distribution_system"]["s3"].get<double>() == doctest::Approx(mean_ens(res.s3)).epsilon(1e-12));

    std::string report = read_text_file(dir + "/scenarios/report.txt");
    CHECK(report.find("s1") != std::string::npos);
    CHECK(report.find("s2") != std::string::npos);
    CHECK(report.find("s3") != std::string::npos);

    // Common random numbers: the three scenarios saw the same fault history,
    // so the no-support run can never beat the supported runs on mean ENS.
    CHECK(mean_ens(res.s2) <= mean_ens(res.s1) + 1e-12);
    CHECK(mean_ens(res.s3) <= mean_ens(res.s1) + 1e-12);
    fs::remove_all(dir);
}

TEST_CASE("scenario study without a microgrid stays single-network") {
    RadialNetwork net = make_network("ieee33");
    ScenarioConfig cfg = default_config("ieee33");
    cfg.iterations = 2;
    cfg.horizon_hours = 200;
    cfg.master_seed = 7;
    cfg.failure_rate_override_per_km = 0.0;
    const std::string dir = fresh_dir("gridrel_exp_nomg");

    run_scenarios(net, cfg, dir);
    json man = json::parse(read_text_file(dir + "/manifest.json"));
    std::map<std::string, int> rows;
    for (const auto& f : man["files"]) rows[f["path"].get<std::string>()] = f["rows"].get<int>();
    CHECK(rows["scenarios/s1/results.csv"] == 2);  // one row per iteration
    CHECK(rows["scenarios/means.csv"] == 3);
    json stats = json::parse(read_text_file(dir + "/scenarios/stats.json"));
    CHECK(!stats["ks"].contains("microgrid"));
    CHECK(!stats["means"].contains("microgrid"));
    fs::remove_all(dir);
}

TEST_CASE("scenario study reruns are byte-identical") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = quick_config(2, 500);
    cfg.failure_rate_override_per_km = 0.8;
    const std::string a = fresh_dir("gridrel_exp_rerun_a");
    const std::string b = fresh_dir("gridrel_exp_rerun_b");

    run_scenarios(net, cfg, a, /*plots=*/true);
    run_scenarios(net, cfg, b, /*plots=*/true);
    auto ta = snapshot_tree(a);
    auto tb = snapshot_tree(b);
    REQUIRE(ta.size() == tb.size());
    for (const auto& [rel, content] : ta) {
        CAPTURE(rel);
        REQUIRE(tb.count(rel) == 1);
        CHECK(content == tb.at(rel));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("factorial covers the full grid and averages it correctly") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = quick_config(2, 400);
    FactorialLevels levels;
    levels.battery_mwh = {0.5, 1.0};
    levels.repair_quantile_h = {1.0, 2.0, 3.0};
    levels.failure_rate_per_km = {1.0, 2.0, 4.0};  // inflated so short runs see faults
    const std::string dir = fresh_dir("gridrel_exp_fact");

    auto cells = run_factorial(net, cfg, levels, dir);
    REQUIRE(cells.size() == 18);

    // Odometer order: battery outermost, failure rate innermost.
    int k = 0;
    for (double bat : levels.battery_mwh)
        for (double rep : levels.repair_quantile_h)
            for (double rate : levels.failure_rate_per_km) {
                CHECK(cells[k].battery_mwh == bat);
                CHECK(cells[k].repair_quantile_h == rep);
                CHECK(cells[k].failure_rate_per_km == rate);
                CHECK(cells[k].results.rows.size() == 2);
                ++k;
            }

    json man = json::parse(read_text_file(dir + "/factorial/manifest.json"));
    std::map<std::string, int> rows;
    for (const auto& f : man["files"]) rows[f["path"].get<std::string>()] = f["rows"].get<int>();
    CHECK(rows["factorial/cells.csv"] == 36);          // 18 cells x 2 networks
    CHECK(rows["factorial/interactions.csv"] == 58);   // 2 x (8 main + 21 pairwise)
    CHECK(count_lines(read_text_file(dir + "/factorial/cells.csv")) == 37);
    CHECK(count_lines(read_text_file(dir + "/factorial/interactions.csv")) == 59);

    // Recompute one main effect and one interaction mean from the returned
    // cells and find the matching CSV row.
    auto cell_mean_dist = [](const FactorialCell& c) {
        double acc = 0.0;
        for (const auto& r : c.results.rows) acc += r.distribution.ens_mwh;
        return acc / static_cast<double>(c.results.rows.size());
    };
    double main_acc = 0.0;
    int main_n = 0;
    double pair_acc = 0.0;
    int pair_n = 0;
    for (const auto& c : cells) {
        if (c.battery_mwh == 0.5) {
            main_acc += cell_mean_dist(c);
            ++main_n;
        }
        if (c.repair_quantile_h == 3.0 && c.failure_rate_per_km == 4.0) {
            pair_acc += cell_mean_dist(c);
            ++pair_n;
        }
    }
    CHECK(main_n == 9);
    CHECK(pair_n == 2);

    std::string inter = read_text_file(dir + "/factorial/interactions.csv");
    std::string main_row = "battery_mwh,distribution_system,0.5,," + format_double(main_acc / 9.0) + ",9\n";
    std::string pair_row =
        "repair_quantile_h*failure_rate_per_km,distribution_system,3,4," + format_double(pair_acc / 2.0) + ",2\n";
    CHECK(inter.find(main_row) != std::string::npos);
    CHECK(inter.find(pair_row) != std::string::npos);

    // A fault process three times as intense cannot average less energy not
    // served over the same common random numbers.
    double low_rate = 0.0, high_rate = 0.0;
    for (const auto& c : cells) {
        if (c.failure_rate_per_km == 1.0) low_rate += cell_mean_dist(c);
        if (c.failure_rate_per_km == 4.0) high_rate += cell_mean_dist(c);
    }
    CHECK(high_rate > low_rate);

    // Determinism across reruns.
    const std::string dir2 = fresh_dir("gridrel_exp_fact2");
    run_factorial(net, cfg, levels, dir2);
    CHECK(read_text_file(dir + "/factorial/cells.csv") == read_text_file(dir2 + "/factorial/cells.csv"));
    CHECK(read_text_file(dir + "/factorial/interactions.csv") ==
          read_text_file(dir2 + "/factorial/interactions.csv"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("location sweep visits every distribution bus") {
    RadialNetwork net = make_network("ieee33_mg");
    ScenarioConfig cfg = quick_config(1, 120);
    cfg.failure_rate_override_per_km = 2.0;
    const std::string dir = fresh_dir("gridrel_exp_loc");

    auto entries = run_location_sweep(net, cfg, dir, /*plots=*/true);
    REQUIRE(entries.size() == net.distribution_buses.size());
    for (size_t i = 0; i < entries.size(); ++i) {
        CAPTURE(i);
        CHECK(entries[i].bus == net.distribution_buses[i]);
        const Bus& b = net.buses[static_cast<size_t>(net.bus_index(entries[i].bus))];
        CHECK(entries[i].x == b.x);
        CHECK(entries[i].y == b.y);
        CHECK(std::isfinite(entries[i].mean_dist_ens_mwh));
        CHECK(entries[i].mean_dist_ens_mwh >= 0.0);
        CHECK(entries[i].mean_mg_ens_mwh >= 0.0);
    }

    json man = json::parse(read_text_file(dir + "/location/manifest.json"));
    bool found = false;
    for (const auto& f : man["files"])
        if (f["path"].get<std::string>() == "location/heatmap.csv") {
            found = true;
            CHECK(f["rows"].get<int>() == static_cast<int>(entries.size()));
        }
    CHECK(found);
    CHECK(count_lines(read_text_file(dir + "/location/heatmap.csv")) == static_cast<int>(entries.size()) + 1);
    CHECK(fs::exists(fs::path(dir) / "location/heatmap.svg"));
    fs::remove_all(dir);
}

TEST_CASE("location sweep refuses a network without a microgrid") {
    RadialNetwork net = make_network("ieee33");
    ScenarioConfig cfg = default_config("ieee33");
    cfg.iterations = 1;
    cfg.horizon_hours = 10;
    CHECK_THROWS_AS((void)run_location_sweep(net, cfg, fresh_dir("gridrel_exp_locbad")), std::invalid_argument);
}
