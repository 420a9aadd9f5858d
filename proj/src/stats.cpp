#include "gridrel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridrel {

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("stddev needs at least 2 points");
    double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace {
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
}  // namespace

AdTestResult anderson_darling_normality(std::vector<double> sample) {
    const size_t n = sample.size();
    if (n < 3) throw std::invalid_argument("normality test needs at least 3 points");
    std::sort(sample.begin(), sample.end());

    AdTestResult r;
    r.mean = sample_mean(sample);
    r.stddev = sample_stddev(sample);
    if (r.stddev <= 0.0) throw std::invalid_argument("normality test needs positive variance");

    double a2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double zi = normal_cdf((sample[i] - r.mean) / r.stddev);
        double zr = normal_cdf((sample[n - 1 - i] - r.mean) / r.stddev);
        zi = std::clamp(zi, 1e-300, 1.0 - 1e-16);
        zr = std::clamp(zr, 1e-300, 1.0 - 1e-16);
        a2 += (2.0 * static_cast<double>(i) + 1.0) * (std::log(zi) + std::log1p(-zr));
    }
    const double dn = static_cast<double>(n);
    r.a2 = -dn - a2 / dn;
    r.a2_adjusted = r.a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));
    r.reject_normality = r.a2_adjusted > r.critical_value;
    return r;
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        // Jacobi theta form converges fast for small arguments.
        const double pi = 3.14159265358979323846;
        double t = std::exp(-pi * pi / (8.0 * x * x));
        double cdf = std::sqrt(2.0 * pi) / x * (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
        return 1.0 - cdf;
    }
    double sf = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * x * x);
        if (k % 2 == 0) term = -term;
        sf += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(sf, 0.0, 1.0);
}

KsTestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("two-sample test needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }

    KsTestResult r;
    r.d = d;
    double ne = na * nb / (na + nb);
    r.p_value = kolmogorov_sf(std::sqrt(ne) * d);
    return r;
}

}  // namespace gridrel
