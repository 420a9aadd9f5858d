#pragma once

#include <random>
#include <stdexcept>

namespace gridrel {

// Gamma(shape k, scale theta); mean = k * theta.
struct GammaSpec {
    double shape = 2.0;
    double scale = 1.0;
};

// Repair duration model for a line. Gamma is the norm; a fixed duration is
// accepted so that deterministic test feeders can pin exact outage lengths.
struct RepairDist {
    enum class Kind { gamma, fixed };
    Kind kind = Kind::gamma;
    GammaSpec gamma;
    double fixed_hours = 0.0;

    static RepairDist make_gamma(double shape, double scale) {
        RepairDist d;
        d.kind = Kind::gamma;
        d.gamma = {shape, scale};
        return d;
    }
    static RepairDist make_fixed(double hours) {
        RepairDist d;
        d.kind = Kind::fixed;
        d.fixed_hours = hours;
        return d;
    }

    double sample(std::mt19937_64& rng) const {
        if (kind == Kind::fixed) return fixed_hours;
        std::gamma_distribution<double> dist(gamma.shape, gamma.scale);
        return dist(rng);
    }

    double mean() const {
        return kind == Kind::fixed ? fixed_hours : gamma.shape * gamma.scale;
    }
};

// Solves for the scale theta such that P(X <= hours) = prob for
// X ~ Gamma(shape, theta). Bisection on the regularized incomplete gamma;
// the returned scale satisfies |CDF(hours) - prob| < 1e-9.
GammaSpec calibrate_gamma(double shape, double hours, double prob);

// Regularized lower incomplete gamma P(k, x).
double gamma_cdf(double shape, double scale, double x);

}  // namespace gridrel
