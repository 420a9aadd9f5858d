#include "gridrel/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "gridrel/datasets.hpp"
#include "gridrel/io.hpp"
#include "gridrel/stats.hpp"

namespace gridrel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

struct Quartiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

Quartiles quartiles(std::vector<double> v) {
    Quartiles q;
    if (v.empty()) return q;
    std::sort(v.begin(), v.end());
    auto at = [&](double frac) {
        double pos = frac * static_cast<double>(v.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, v.size() - 1);
        double w = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - w) + v[hi] * w;
    };
    q.min = v.front();
    q.q1 = at(0.25);
    q.median = at(0.5);
    q.q3 = at(0.75);
    q.max = v.back();
    q.mean = sample_mean(v);
    return q;
}

std::vector<double> series(const ResultSet& rs, bool microgrid, double (*get)(const IndexReport&)) {
    std::vector<double> v;
    v.reserve(rs.rows.size());
    for (const auto& r : rs.rows) v.push_back(get(microgrid ? r.microgrid : r.distribution));
    return v;
}

double get_ens(const IndexReport& r) { return r.ens_mwh; }
double get_cens(const IndexReport& r) { return r.cens; }
double get_saifi(const IndexReport& r) { return r.saifi; }
double get_saidi(const IndexReport& r) { return r.saidi_h; }
double get_caidi(const IndexReport& r) { return r.caidi_h; }

json ad_or_null(const std::vector<double>& v) {
    try {
        AdTestResult ad = anderson_darling_normality(v);
        return json{{"a2", ad.a2},
                    {"a2_adjusted", ad.a2_adjusted},
                    {"critical_value", ad.critical_value},
                    {"reject_normality", ad.reject_normality}};
    } catch (const std::exception& e) {
        return json{{"error", e.what()}};
    }
}

json ks_entry(const std::vector<double>& a, const std::vector<double>& b) {
    KsTestResult ks = ks_two_sample(a, b);
    return json{{"d", ks.d}, {"p_value", ks.p_value}};
}

// Minimal static SVG plot helpers --------------------------------------------

std::string svg_header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string svg_text(double x, double y, const std::string& s, int size = 12) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" font-size=\"%d\" font-family=\"sans-serif\">", x, y,
                  size);
    return std::string(buf) + s + "</text>\n";
}

void write_boxplot_svg(const std::string& path, const std::vector<std::string>& labels,
                       const std::vector<Quartiles>& stats, const std::string& title) {
    const int w = 640, h = 420, left = 70, top = 50, bottom = 50;
    double vmax = 1e-12;
    for (const auto& q : stats) vmax = std::max(vmax, q.max);
    auto ymap = [&](double v) { return top + (h - top - bottom) * (1.0 - v / vmax); };
    std::string out = svg_header(w, h);
    out += svg_text(20, 28, title, 15);
    double band = static_cast<double>(w - left - 30) / static_cast<double>(stats.size());
    for (size_t i = 0; i < stats.size(); ++i) {
        const Quartiles& q = stats[i];
        double cx = left + band * (static_cast<double>(i) + 0.5);
        char buf[640];
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\" stroke-width=\"2\"/>\n",
                      cx, ymap(q.min), cx, ymap(q.q1), cx, ymap(q.q3), cx, ymap(q.max), cx - band * 0.25, ymap(q.q3),
                      band * 0.5, std::max(1.0, ymap(q.q1) - ymap(q.q3)), cx - band * 0.25, ymap(q.median),
                      cx + band * 0.25, ymap(q.median));
        out += buf;
        out += svg_text(cx - 12, h - 20, labels[i]);
    }
    out += svg_text(8, top - 8, "0 .. " + format_double(vmax) + " MWh", 11);
    out += "</svg>\n";
    write_text_file(path, out);
}

void write_lines_svg(const std::string& path, const std::vector<std::string>& x_labels,
                     const std::vector<std::pair<std::string, std::vector<double>>>& curves,
                     const std::string& title) {
    const int w = 640, h = 420, left = 70, top = 50, bottom = 60;
    double vmax = 1e-12, vmin = 1e300;
    for (const auto& [name, ys] : curves)
        for (double y : ys) {
            vmax = std::max(vmax, y);
            vmin = std::min(vmin, y);
        }
    if (vmin > vmax) vmin = 0.0;
    double span = std::max(1e-12, vmax - vmin);
    auto ymap = [&](double v) { return top + (h - top - bottom) * (1.0 - (v - vmin) / span); };
    auto xmap = [&](size_t i) {
        return static_cast<double>(left) +
               static_cast<double>(w - left - 30) * (x_labels.size() < 2 ? 0.5
                                                                          : static_cast<double>(i) /
                                                                                static_cast<double>(x_labels.size() - 1));
    };
    const char* colors[] = {"#1b6ca8", "#d1495b", "#3c8d40", "#8d5fd3", "#c78a32", "#444444"};
    std::string out = svg_header(w, h);
    out += svg_text(20, 28, title, 15);
    for (size_t c = 0; c < curves.size(); ++c) {
        std::string pts;
        for (size_t i = 0; i < curves[c].second.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s%.1f,%.1f", i ? " " : "", xmap(i), ymap(curves[c].second[i]));
            pts += buf;
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colors[c % 6]) + "\" stroke-width=\"2\" points=\"" +
               pts + "\"/>\n";
        out += svg_text(static_cast<double>(left + 170 * (c % 3)), static_cast<double>(h - 24 + 16 * (c / 3)),
                        curves[c].first, 11);
    }
    for (size_t i = 0; i < x_labels.size(); ++i) out += svg_text(xmap(i) - 10, h - 44, x_labels[i], 11);
    out += svg_text(8, top - 8, format_double(vmin) + " .. " + format_double(vmax) + " MWh", 11);
    out += "</svg>\n";
    write_text_file(path, out);
}

void write_heatmap_svg(const std::string& path, const std::vector<LocationEntry>& entries, const std::string& title) {
    const int w = 760, h = 480;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300, vmin = 1e300, vmax = -1e300;
    for (const auto& e : entries) {
        xmin = std::min(xmin, e.x);
        xmax = std::max(xmax, e.x);
        ymin = std::min(ymin, e.y);
        ymax = std::max(ymax, e.y);
        vmin = std::min(vmin, e.mean_dist_ens_mwh);
        vmax = std::max(vmax, e.mean_dist_ens_mwh);
    }
    double vspan = std::max(1e-12, vmax - vmin);
    auto xmap = [&](double x) { return 50.0 + (x - xmin) / std::max(1e-9, xmax - xmin) * (w - 100); };
    auto ymap = [&](double y) { return 60.0 + (ymax - y) / std::max(1e-9, ymax - ymin) * (h - 130); };
    std::string out = svg_header(w, h);
    out += svg_text(20, 28, title, 15);
    for (const auto& e : entries) {
        double t = (e.mean_dist_ens_mwh - vmin) / vspan;  // 0 best (green) .. 1 worst (red)
        int r = static_cast<int>(60 + 195 * t);
        int g = static_cast<int>(200 - 160 * t);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"9\" fill=\"rgb(%d,%d,70)\"/>\n",
                      xmap(e.x), ymap(e.y), r, g);
        out += buf;
        out += svg_text(xmap(e.x) - 10, ymap(e.y) - 12, e.bus, 10);
    }
    out += svg_text(20, h - 16, "mean ENS " + format_double(vmin) + " (green) .. " + format_double(vmax) + " (red) MWh",
                    11);
    out += "</svg>\n";
    write_text_file(path, out);
}

}  // namespace

ScenarioStudyResult run_scenarios(const RadialNetwork& net, const ScenarioConfig& base, const std::string& out_dir,
                                  bool plots) {
    ScenarioStudyResult out;
    const char* names[3] = {"s1", "s2", "s3"};
    const ControllerMode modes[3] = {ControllerMode::no_support, ControllerMode::full_support,
                                     ControllerMode::limited_support};
    ResultSet* sets[3] = {&out.s1, &out.s2, &out.s3};

    std::vector<ManifestEntry> manifest;
    for (int s = 0; s < 3; ++s) {
        ScenarioConfig cfg = base;
        cfg.microgrid_mode = modes[s];  // common random numbers: same master_seed
        *sets[s] = run_simulation(net, cfg);
        ensure_dir(out_dir + "/scenarios/" + names[s]);
        int rows = write_results_csv(*sets[s], out_dir + "/scenarios/" + names[s] + "/results.csv");
        manifest.push_back({std::string("scenarios/") + names[s] + "/results.csv", rows});
        write_summary_json(*sets[s], out_dir + "/scenarios/" + names[s] + "/summary.json");
        manifest.push_back({std::string("scenarios/") + names[s] + "/summary.json", 0});
    }

    bool has_mg = !net.microgrid_buses.empty();

    // Mean table and box-plot data.
    std::string means = "scenario,network,mean_ENS_MWh,mean_CENS,mean_SAIFI,mean_SAIDI_h,mean_CAIDI_h\n";
    std::string box = "scenario,network,min,q1,median,q3,max,mean\n";
    std::vector<std::string> box_labels;
    std::vector<Quartiles> box_stats_dist, box_stats_mg;
    for (int s = 0; s < 3; ++s) {
        for (int m = 0; m < (has_mg ? 2 : 1); ++m) {
            bool mg = m == 1;
            const char* nw = mg ? "microgrid" : "distribution_system";
            means += std::string(names[s]) + "," + nw + "," + format_double(sample_mean(series(*sets[s], mg, get_ens))) +
                     "," + format_double(sample_mean(series(*sets[s], mg, get_cens))) + "," +
                     format_double(sample_mean(series(*sets[s], mg, get_saifi))) + "," +
                     format_double(sample_mean(series(*sets[s], mg, get_saidi))) + "," +
                     format_double(sample_mean(series(*sets[s], mg, get_caidi))) + "\n";
            Quartiles q = quartiles(series(*sets[s], mg, get_ens));
            box += std::string(names[s]) + "," + nw + "," + format_double(q.min) + "," + format_double(q.q1) + "," +
                   format_double(q.median) + "," + format_double(q.q3) + "," + format_double(q.max) + "," +
                   format_double(q.mean) + "\n";
            (mg ? box_stats_mg : box_stats_dist).push_back(q);
        }
        box_labels.push_back(names[s]);
    }
    write_text_file(out_dir + "/scenarios/means.csv", means);
    manifest.push_back({"scenarios/means.csv", 3 * (has_mg ? 2 : 1)});
    write_text_file(out_dir + "/scenarios/boxplot.csv", box);
    manifest.push_back({"scenarios/boxplot.csv", 3 * (has_mg ? 2 : 1)});

    // Statistical tables: per-scenario normality and pairwise distribution
    // comparisons of the per-iteration ENS samples.
    json stats;
    for (int s = 0; s < 3; ++s) {
        stats["anderson_darling"][names[s]]["distribution_system"]["ENS_MWh"] = ad_or_null(series(*sets[s], false, get_ens));
        if (has_mg)
            stats["anderson_darling"][names[s]]["microgrid"]["ENS_MWh"] = ad_or_null(series(*sets[s], true, get_ens));
    }
    const int pair_a[3] = {0, 0, 1};
    const int pair_b[3] = {1, 2, 2};
    for (int p = 0; p < 3; ++p) {
        std::string key = std::string(names[pair_a[p]]) + "_vs_" + names[pair_b[p]];
        stats["ks"]["distribution_system"][key] =
            ks_entry(series(*sets[pair_a[p]], false, get_ens), series(*sets[pair_b[p]], false, get_ens));
        if (has_mg)
            stats["ks"]["microgrid"][key] =
                ks_entry(series(*sets[pair_a[p]], true, get_ens), series(*sets[pair_b[p]], true, get_ens));
    }
    double d1 = sample_mean(series(out.s1, false, get_ens));
    double d2 = sample_mean(series(out.s2, false, get_ens));
    double d3 = sample_mean(series(out.s3, false, get_ens));
    stats["means"]["distribution_system"] = {{"s1", d1}, {"s2", d2}, {"s3", d3}};
    double red2 = d1 > 0.0 ? 100.0 * (d1 - d2) / d1 : 0.0;
    double red3 = d1 > 0.0 ? 100.0 * (d1 - d3) / d1 : 0.0;
    stats["reductions_percent"]["distribution_system"] = {{"s2_vs_s1", red2}, {"s3_vs_s1", red3}};
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    if (has_mg) {
        m1 = sample_mean(series(out.s1, true, get_ens));
        m2 = sample_mean(series(out.s2, true, get_ens));
        m3 = sample_mean(series(out.s3, true, get_ens));
        stats["means"]["microgrid"] = {{"s1", m1}, {"s2", m2}, {"s3", m3}};
        stats["reductions_percent"]["microgrid"] = {
            {"s2_vs_s1", m1 > 0.0 ? 100.0 * (m1 - m2) / m1 : 0.0},
            {"s3_vs_s1", m1 > 0.0 ? 100.0 * (m1 - m3) / m1 : 0.0}};
    }
    write_text_file(out_dir + "/scenarios/stats.json", stats.dump(2) + "\n");
    manifest.push_back({"scenarios/stats.json", 0});

    // Short human-readable report of the study outcome.
    std::string rep;
    rep += "Scenario study: controller modes under common random numbers\n";
    rep += "  s1 = no support, s2 = full support, s3 = limited support\n\n";
    rep += "Distribution system mean ENS (MWh/yr):\n";
    rep += "  s1 " + format_double(d1) + ", s2 " + format_double(d2) + ", s3 " + format_double(d3) + "\n";
    rep += "  reduction vs s1: s2 " + format_double(red2) + "%, s3 " + format_double(red3) + "%\n";
    if (has_mg) {
        rep += "Microgrid mean ENS (MWh/yr):\n";
        rep += "  s1 " + format_double(m1) + ", s2 " + format_double(m2) + ", s3 " + format_double(m3) + "\n";
        if (m1 > 0.0)
            rep += "  reduction vs s1: s2 " + format_double(100.0 * (m1 - m2) / m1) + "%, s3 " +
                   format_double(100.0 * (m1 - m3) / m1) + "%\n";
    }
    rep += "\nPairwise two-sample KS p-values are in stats.json.\n";
    write_text_file(out_dir + "/scenarios/report.txt", rep);
    manifest.push_back({"scenarios/report.txt", 0});

    if (plots) {
        write_boxplot_svg(out_dir + "/scenarios/boxplot_distribution.svg", box_labels, box_stats_dist,
                          "Yearly ENS by scenario, distribution system");
        manifest.push_back({"scenarios/boxplot_distribution.svg", 0});
        if (has_mg) {
            write_boxplot_svg(out_dir + "/scenarios/boxplot_microgrid.svg", box_labels, box_stats_mg,
                              "Yearly ENS by scenario, microgrid");
            manifest.push_back({"scenarios/boxplot_microgrid.svg", 0});
        }
    }

    write_manifest(manifest, base.master_seed, out_dir + "/manifest.json");
    return out;
}

std::vector<FactorialCell> run_factorial(const RadialNetwork& net, const ScenarioConfig& base,
                                         const FactorialLevels& levels, const std::string& out_dir, bool plots) {
    std::vector<FactorialCell> cells;
    ensure_dir(out_dir + "/factorial");

    std::string csv =
        "battery_mwh,repair_quantile_h,failure_rate_per_km,network,mean_ENS_MWh,stddev_ENS_MWh,iterations\n";
    int rows = 0;
    for (double bat : levels.battery_mwh)
        for (double rep : levels.repair_quantile_h)
            for (double rate : levels.failure_rate_per_km) {
                ScenarioConfig cfg = base;
                cfg.microgrid_mode = ControllerMode::limited_support;
                cfg.battery.capacity_mwh = bat;
                cfg.repair_quantile_hours = rep;
                cfg.failure_rate_override_per_km = rate;
                FactorialCell cell;
                cell.battery_mwh = bat;
                cell.repair_quantile_h = rep;
                cell.failure_rate_per_km = rate;
                cell.results = run_simulation(net, cfg);
                for (int m = 0; m < 2; ++m) {
                    bool mg = m == 1;
                    auto v = series(cell.results, mg, get_ens);
                    csv += format_double(bat) + "," + format_double(rep) + "," + format_double(rate) + "," +
                           (mg ? "microgrid" : "distribution_system") + "," + format_double(sample_mean(v)) + "," +
                           format_double(v.size() > 1 ? sample_stddev(v) : 0.0) + "," + std::to_string(v.size()) + "\n";
                    ++rows;
                }
                cells.push_back(std::move(cell));
            }
    write_text_file(out_dir + "/factorial/cells.csv", csv);

    // Main-effect and two-factor interaction means.
    struct Factor {
        const char* name;
        const std::vector<double>* lv;
        double FactorialCell::*field;
    };
    const Factor factors[3] = {{"battery_mwh", &levels.battery_mwh, &FactorialCell::battery_mwh},
                               {"repair_quantile_h", &levels.repair_quantile_h, &FactorialCell::repair_quantile_h},
                               {"failure_rate_per_km", &levels.failure_rate_per_km, &FactorialCell::failure_rate_per_km}};
    auto cell_mean = [&](const FactorialCell& c, bool mg) { return sample_mean(series(c.results, mg, get_ens)); };

    std::string inter = "effect,network,level_a,level_b,mean_ENS_MWh,cells\n";
    int irows = 0;
    for (int m = 0; m < 2; ++m) {
        bool mg = m == 1;
        const char* nw = mg ? "microgrid" : "distribution_system";
        for (const auto& f : factors)
            for (double lv : *f.lv) {
                double acc = 0.0;
                int n = 0;
                for (const auto& c : cells)
                    if (c.*f.field == lv) {
                        acc += cell_mean(c, mg);
                        ++n;
                    }
                inter += std::string(f.name) + "," + nw + "," + format_double(lv) + ",," +
                         format_double(n ? acc / n : 0.0) + "," + std::to_string(n) + "\n";
                ++irows;
            }
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for (double la : *factors[a].lv)
                    for (double lb : *factors[b].lv) {
                        double acc = 0.0;
                        int n = 0;
                        for (const auto& c : cells)
                            if (c.*factors[a].field == la && c.*factors[b].field == lb) {
                                acc += cell_mean(c, mg);
                                ++n;
                            }
                        inter += std::string(factors[a].name) + "*" + factors[b].name + "," + nw + "," +
                                 format_double(la) + "," + format_double(lb) + "," + format_double(n ? acc / n : 0.0) +
                                 "," + std::to_string(n) + "\n";
                        ++irows;
                    }
    }
    write_text_file(out_dir + "/factorial/interactions.csv", inter);

    if (plots) {
        for (int m = 0; m < 2; ++m) {
            bool mg = m == 1;
            // battery x repair interaction: one curve per battery level over
            // the repair levels.
            std::vector<std::string> xl;
            for (double rep : levels.repair_quantile_h) xl.push_back(format_double(rep) + "h");
            std::vector<std::pair<std::string, std::vector<double>>> curves;
            for (double bat : levels.battery_mwh) {
                std::vector<double> ys;
                for (double rep : levels.repair_quantile_h) {
                    double acc = 0.0;
                    int n = 0;
                    for (const auto& c : cells)
                        if (c.battery_mwh == bat && c.repair_quantile_h == rep) {
                            acc += cell_mean(c, mg);
                            ++n;
                        }
                    ys.push_back(n ? acc / n : 0.0);
                }
                curves.push_back({"battery " + format_double(bat) + " MWh", ys});
            }
            write_lines_svg(out_dir + std::string("/factorial/interaction_") + (mg ? "microgrid" : "distribution") +
                                ".svg",
                            xl, curves,
                            std::string("Mean ENS vs repair level, ") + (mg ? "microgrid" : "distribution system"));
        }
    }

    std::vector<ManifestEntry> manifest = {{"factorial/cells.csv", rows}, {"factorial/interactions.csv", irows}};
    if (plots) {
        manifest.push_back({"factorial/interaction_distribution.svg", 0});
        manifest.push_back({"factorial/interaction_microgrid.svg", 0});
    }
    write_manifest(manifest, base.master_seed, out_dir + "/factorial/manifest.json");
    return cells;
}

std::vector<LocationEntry> run_location_sweep(const RadialNetwork& net, const ScenarioConfig& base,
                                              const std::string& out_dir, bool plots) {
    if (!net.connection_line) throw std::invalid_argument("location sweep needs a network with a microgrid");
    ensure_dir(out_dir + "/location");

    std::vector<LocationEntry> entries;
    for (const auto& bus : net.distribution_buses) {
        RadialNetwork moved = reattach_microgrid(net, bus);
        auto report = moved.validate();
        if (!report.ok())
            throw std::runtime_error("placement at " + bus + " produced an invalid network: " +
                                     report.issues.front().message);
        ResultSet rs = run_simulation(moved, base);
        LocationEntry e;
        e.bus = bus;
        const Bus& b = moved.buses[static_cast<size_t>(moved.bus_index(bus))];
        e.x = b.x;
        e.y = b.y;
        auto v = series(rs, false, get_ens);
        e.mean_dist_ens_mwh = sample_mean(v);
        e.stddev_dist_ens_mwh = v.size() > 1 ? sample_stddev(v) : 0.0;
        e.mean_mg_ens_mwh = sample_mean(series(rs, true, get_ens));
        entries.push_back(std::move(e));
    }

    std::string csv = "bus,x,y,mean_dist_ENS_MWh,stddev_dist_ENS_MWh,mean_mg_ENS_MWh\n";
    for (const auto& e : entries)
        csv += e.bus + "," + format_double(e.x) + "," + format_double(e.y) + "," + format_double(e.mean_dist_ens_mwh) +
               "," + format_double(e.stddev_dist_ens_mwh) + "," + format_double(e.mean_mg_ens_mwh) + "\n";
    write_text_file(out_dir + "/location/heatmap.csv", csv);

    std::vector<ManifestEntry> manifest = {{"location/heatmap.csv", static_cast<int>(entries.size())}};
    if (plots) {
        write_heatmap_svg(out_dir + "/location/heatmap.svg", entries,
                          "Distribution-system mean ENS by microgrid placement");
        manifest.push_back({"location/heatmap.svg", 0});
    }
    write_manifest(manifest, base.master_seed, out_dir + "/location/manifest.json");
    return entries;
}

}  // namespace gridrel
