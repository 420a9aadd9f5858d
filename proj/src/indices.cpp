#include "gridrel/indices.hpp"

namespace gridrel {

IndexReport compute_indices(const std::vector<LoadPointStats>& points) {
    IndexReport r;
    double customers = 0.0;
    double weighted_interruptions = 0.0;
    double weighted_hours = 0.0;
    for (const auto& p : points) {
        r.lambda_s += p.interruptions;
        r.u_s_h += p.hours;
        r.ens_mwh += p.ens_mwh;
        r.cens += p.cens;
        customers += static_cast<double>(p.customers);
        weighted_interruptions += p.interruptions * static_cast<double>(p.customers);
        weighted_hours += p.hours * static_cast<double>(p.customers);
    }
    r.r_s_h = r.lambda_s > 0.0 ? r.u_s_h / r.lambda_s : 0.0;
    if (customers > 0.0) {
        r.saifi = weighted_interruptions / customers;
        r.saidi_h = weighted_hours / customers;
    }
    r.caidi_h = r.saifi > 0.0 ? r.saidi_h / r.saifi : 0.0;
    return r;
}

}  // namespace gridrel
