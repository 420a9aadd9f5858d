#pragma once

#include <vector>

namespace gridrel {

// Accumulated outage history of one load point over one simulated year.
struct LoadPointStats {
    double interruptions = 0.0;  // count of maximal shed intervals
    double hours = 0.0;          // total interrupted duration
    double ens_mwh = 0.0;
    double cens = 0.0;
    int customers = 0;
};

struct IndexReport {
    double lambda_s = 0.0;  // 1/yr, sum over load points
    double u_s_h = 0.0;     // h/yr
    double r_s_h = 0.0;     // u_s / lambda_s
    double ens_mwh = 0.0;
    double cens = 0.0;
    double saifi = 0.0;
    double saidi_h = 0.0;
    double caidi_h = 0.0;
};

IndexReport compute_indices(const std::vector<LoadPointStats>& points);

}  // namespace gridrel
