#include "gridrel/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridrel/rng.hpp"

namespace gridrel {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Calendar {
    int day;        // 0..364
    int hour;       // 0..23
    int weekday;    // 0 = Monday
    double season;  // 1 at mid winter, -1 at mid summer (northern hemisphere)
};

Calendar calendar(int h) {
    Calendar c;
    c.day = (h / 24) % 365;
    c.hour = h % 24;
    c.weekday = (h / 24) % 7;
    c.season = std::cos(2.0 * kPi * (static_cast<double>(c.day) - 15.0) / 365.0);
    return c;
}

double category_shape(CustomerCategory cat, const Calendar& c) {
    bool workday = c.weekday < 5;
    double t = static_cast<double>(c.hour);
    double diurnal = 0.0;
    double seasonal = 1.0;
    switch (cat) {
        case CustomerCategory::household:
            diurnal = 0.35 + 0.25 * std::exp(-0.5 * std::pow((t - 8.0) / 2.5, 2)) +
                      0.65 * std::exp(-0.5 * std::pow((t - 18.5) / 3.0, 2));
            seasonal = 1.0 + 0.40 * c.season;
            break;
        case CustomerCategory::farm:
            diurnal = 0.40 + 0.45 * std::exp(-0.5 * std::pow((t - 6.5) / 1.8, 2)) +
                      0.45 * std::exp(-0.5 * std::pow((t - 17.0) / 2.0, 2));
            seasonal = 1.0 + 0.20 * c.season;
            break;
        case CustomerCategory::industry:
            diurnal = (t >= 6.0 && t < 22.0 && workday) ? 1.0 : 0.35;
            seasonal = 1.0 + 0.10 * c.season;
            break;
        case CustomerCategory::trade:
            diurnal = (t >= 9.0 && t < 20.0 && c.weekday < 6) ? 1.0 : 0.30;
            seasonal = 1.0 + 0.15 * c.season;
            break;
        case CustomerCategory::office:
            diurnal = (t >= 7.0 && t < 17.0 && workday) ? 1.0 : 0.25;
            seasonal = 1.0 + 0.15 * c.season;
            break;
    }
    return std::max(0.15, diurnal * seasonal);
}

// Solar elevation proxy for a site around 60 degrees north.
double solar_shape(const Calendar& c) {
    double decl = -23.44 * std::cos(2.0 * kPi * (static_cast<double>(c.day) + 10.0) / 365.0);
    double lat = 60.0;
    double hour_angle = (static_cast<double>(c.hour) - 12.0) * 15.0;
    auto rad = [](double d) { return d * kPi / 180.0; };
    double sin_elev = std::sin(rad(lat)) * std::sin(rad(decl)) +
                      std::cos(rad(lat)) * std::cos(rad(decl)) * std::cos(rad(hour_angle));
    return std::max(0.0, sin_elev);
}

struct Weather {
    std::vector<double> wind_speed_ms;
    std::vector<double> irradiance;           // 0..1
    std::vector<double> load_scale;           // empty when synthetic shapes apply
};

Weather synthetic_weather(int horizon, std::mt19937_64& rng) {
    Weather w;
    w.wind_speed_ms.resize(static_cast<size_t>(horizon));
    w.irradiance.resize(static_cast<size_t>(horizon));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Wind speed = seasonal base + slow synoptic component (multi-day highs
    // and lulls, correlation time ~3 days) + fast hour-scale turbulence.
    // Calm spells below the turbine cut-in are a real feature of the climate,
    // especially in summer, and drive island-mode energy shortfalls.
    double synoptic = 0.0;
    double gust = 0.0;
    double cloud = 0.5;
    for (int h = 0; h < horizon; ++h) {
        Calendar c = calendar(h);
        synoptic = 0.985 * synoptic + 0.35 * noise(rng);
        gust = 0.80 * gust + 0.90 * noise(rng);
        double base = 5.5 + 2.0 * c.season;
        w.wind_speed_ms[static_cast<size_t>(h)] = std::max(0.0, base + synoptic + gust);
        if (c.hour == 0) cloud = 0.25 + 0.75 * unif(rng);
        w.irradiance[static_cast<size_t>(h)] = solar_shape(c) * cloud;
    }
    return w;
}

Weather read_weather_csv(const std::string& path, int horizon) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weather csv: " + path);
    Weather w;
    w.wind_speed_ms.assign(static_cast<size_t>(horizon), 0.0);
    w.irradiance.assign(static_cast<size_t>(horizon), 0.0);
    w.load_scale.assign(static_cast<size_t>(horizon), 1.0);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty weather csv: " + path);
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("weather csv row needs 4 columns: " + line);
            vals[i] = std::stod(cell);
        }
        int h = static_cast<int>(vals[0]);
        if (h < 0 || h >= horizon) continue;
        w.wind_speed_ms[static_cast<size_t>(h)] = vals[1];
        w.irradiance[static_cast<size_t>(h)] = vals[2];
        w.load_scale[static_cast<size_t>(h)] = vals[3];
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("weather csv has no data rows: " + path);
    return w;
}

}  // namespace

double wind_power(const WindCurve& curve, double rated_mw, double speed_ms) {
    if (speed_ms < curve.cut_in_ms || speed_ms >= curve.cut_out_ms) return 0.0;
    if (speed_ms >= curve.rated_ms) return rated_mw;
    double num = std::pow(speed_ms, 3) - std::pow(curve.cut_in_ms, 3);
    double den = std::pow(curve.rated_ms, 3) - std::pow(curve.cut_in_ms, 3);
    return rated_mw * num / den;
}

ProfileSet generate_profiles(const RadialNetwork& net, const ProfileConfig& cfg, int horizon, std::uint64_t seed) {
    if (horizon <= 0) throw std::invalid_argument("generate_profiles: horizon must be positive");
    ProfileSet out;
    out.horizon = horizon;

    auto rng = make_engine(seed, 0, stream_profiles);
    Weather weather = cfg.weather_csv ? read_weather_csv(*cfg.weather_csv, horizon) : synthetic_weather(horizon, rng);

    double q_factor = std::tan(std::acos(std::clamp(cfg.power_factor, 0.05, 1.0)));

    // Category of the bus owning each load ref drives its shape.
    std::map<std::string, CustomerCategory> ref_category;
    for (const auto& b : net.buses)
        if (b.load_ref) ref_category[*b.load_ref] = b.customer_category;

    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (const auto& [ref, spec] : cfg.loads) {
        std::vector<double> p(static_cast<size_t>(horizon));
        if (cfg.flat_loads) {
            std::fill(p.begin(), p.end(), spec.peak_mw);
        } else if (!weather.load_scale.empty()) {
            for (int h = 0; h < horizon; ++h)
                p[static_cast<size_t>(h)] = spec.peak_mw * weather.load_scale[static_cast<size_t>(h)];
        } else {
            CustomerCategory cat = CustomerCategory::household;
            auto it = ref_category.find(ref);
            if (it != ref_category.end()) cat = it->second;
            double peak = 0.0;
            for (int h = 0; h < horizon; ++h) {
                double v = category_shape(cat, calendar(h)) * (1.0 + jitter(rng));
                p[static_cast<size_t>(h)] = v;
                peak = std::max(peak, v);
            }
            for (auto& v : p) v *= spec.peak_mw / peak;
        }
        std::vector<double> q(static_cast<size_t>(horizon));
        double qp = spec.peak_mvar ? *spec.peak_mvar / std::max(spec.peak_mw, 1e-12) : q_factor;
        for (int h = 0; h < horizon; ++h) q[static_cast<size_t>(h)] = p[static_cast<size_t>(h)] * qp;
        out.load_p_mw.emplace(ref, std::move(p));
        out.load_q_mvar.emplace(ref, std::move(q));
    }

    for (const auto& [ref, unit] : cfg.generation) {
        std::vector<double> p(static_cast<size_t>(horizon));
        for (int h = 0; h < horizon; ++h) {
            if (unit.kind == GenKind::wind)
                p[static_cast<size_t>(h)] = wind_power(cfg.wind_curve, unit.rated_mw, weather.wind_speed_ms[static_cast<size_t>(h)]);
            else
                p[static_cast<size_t>(h)] = unit.rated_mw * weather.irradiance[static_cast<size_t>(h)];
        }
        out.gen_p_mw.emplace(ref, std::move(p));
    }

    // Pin the coincident renewable peak to the configured maximum.
    if (cfg.combined_renewable_peak_mw > 0.0 && !out.gen_p_mw.empty() && !cfg.weather_csv) {
        double peak = 0.0;
        for (int h = 0; h < horizon; ++h) {
            double sum = 0.0;
            for (const auto& [ref, series] : out.gen_p_mw) sum += series[static_cast<size_t>(h)];
            peak = std::max(peak, sum);
        }
        if (peak > 0.0) {
            double scale = cfg.combined_renewable_peak_mw / peak;
            for (auto& [ref, series] : out.gen_p_mw)
                for (auto& v : series) v *= scale;
        }
    }

    return out;
}

}  // namespace gridrel
