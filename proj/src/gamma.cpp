#include "gridrel/gamma.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace gridrel {

double gamma_cdf(double shape, double scale, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, x / scale);
}

GammaSpec calibrate_gamma(double shape, double hours, double prob) {
    if (shape <= 0.0 || hours <= 0.0) throw std::invalid_argument("calibrate_gamma: shape and hours must be positive");
    if (prob <= 0.0 || prob >= 1.0) throw std::invalid_argument("calibrate_gamma: prob must lie in (0, 1)");

    // CDF(hours) is strictly decreasing in the scale. Bracket, then bisect.
    double lo = 1e-9, hi = 1.0;
    while (gamma_cdf(shape, hi, hours) > prob) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("calibrate_gamma: failed to bracket");
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double c = gamma_cdf(shape, mid, hours);
        if (std::abs(c - prob) < 1e-12) return {shape, mid};
        if (c > prob)
            lo = mid;
        else
            hi = mid;
    }
    return {shape, 0.5 * (lo + hi)};
}

}  // namespace gridrel
