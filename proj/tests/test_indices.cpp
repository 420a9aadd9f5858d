#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "gridrel/indices.hpp"

using namespace gridrel;

TEST_CASE("no load points give all-zero indices") {
    IndexReport r = compute_indices({});
    CHECK(r.lambda_s == 0.0);
    CHECK(r.u_s_h == 0.0);
    CHECK(r.r_s_h == 0.0);
    CHECK(r.saifi == 0.0);
    CHECK(r.saidi_h == 0.0);
    CHECK(r.caidi_h == 0.0);
    CHECK(r.ens_mwh == 0.0);
    CHECK(r.cens == 0.0);
}

TEST_CASE("a single load point reproduces its own history") {
    LoadPointStats p;
    p.interruptions = 1.0;
    p.hours = 4.0;
    p.ens_mwh = 2.0;
    p.cens = 20.0;
    p.customers = 10;
    IndexReport r = compute_indices({p});
    CHECK(r.lambda_s == doctest::Approx(1.0));
    CHECK(r.u_s_h == doctest::Approx(4.0));
    CHECK(r.r_s_h == doctest::Approx(4.0));
    CHECK(r.saifi == doctest::Approx(1.0));
    CHECK(r.saidi_h == doctest::Approx(4.0));
    CHECK(r.caidi_h == doctest::Approx(4.0));
    CHECK(r.ens_mwh == doctest::Approx(2.0));
    CHECK(r.cens == doctest::Approx(20.0));
}

TEST_CASE("two load points weight the customer indices by customer count") {
    LoadPointStats a;  // 10 customers, 2 interruptions, 4 h
    a.interruptions = 2.0;
    a.hours = 4.0;
    a.customers = 10;
    LoadPointStats b;  // 30 customers, 1 interruption, 1 h
    b.interruptions = 1.0;
    b.hours = 1.0;
    b.customers = 30;
    IndexReport r = compute_indices({a, b});
    // SAIFI = (2*10 + 1*30) / 40, SAIDI = (4*10 + 1*30) / 40.
    CHECK(r.saifi == doctest::Approx(1.25));
    CHECK(r.saidi_h == doctest::Approx(1.75));
    CHECK(r.caidi_h == doctest::Approx(1.75 / 1.25));
    // System frequency/duration just sum over load points.
    CHECK(r.lambda_s == doctest::Approx(3.0));
    CHECK(r.u_s_h == doctest::Approx(5.0));
    CHECK(r.r_s_h == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("index identities hold on arbitrary inputs") {
    std::vector<LoadPointStats> pts;
    for (int i = 0; i < 7; ++i) {
        LoadPointStats p;
        p.interruptions = 0.5 * i;
        p.hours = 1.3 * i;
        p.ens_mwh = 0.2 * i;
        p.cens = 2.0 * i;
        p.customers = 5 + 3 * i;
        pts.push_back(p);
    }
    IndexReport r = compute_indices(pts);
    CHECK(r.caidi_h * r.saifi == doctest::Approx(r.saidi_h).epsilon(1e-9));
    CHECK(r.r_s_h * r.lambda_s == doctest::Approx(r.u_s_h).epsilon(1e-9));
}

TEST_CASE("scaling every customer count leaves the per-customer indices unchanged") {
    std::vector<LoadPointStats> pts;
    for (int i = 0; i < 5; ++i) {
        LoadPointStats p;
        p.interruptions = 1.0 + i;
        p.hours = 2.0 + 0.7 * i;
        p.customers = 4 + i;
        pts.push_back(p);
    }
    IndexReport a = compute_indices(pts);
    for (auto& p : pts) p.customers *= 2;
    IndexReport b = compute_indices(pts);
    CHECK(a.saifi == doctest::Approx(b.saifi).epsilon(1e-12));
    CHECK(a.saidi_h == doctest::Approx(b.saidi_h).epsilon(1e-12));
    CHECK(a.caidi_h == doctest::Approx(b.caidi_h).epsilon(1e-12));
}

TEST_CASE("energy and cost aggregate additively") {
    LoadPointStats a;
    a.ens_mwh = 1.5;
    a.cens = 15.0;
    a.customers = 3;
    LoadPointStats b;
    b.ens_mwh = 0.25;
    b.cens = 20.0;
    b.customers = 9;
    IndexReport one = compute_indices({a});
    IndexReport two = compute_indices({a, b});
    CHECK(two.ens_mwh == doctest::Approx(one.ens_mwh + 0.25));
    CHECK(two.cens == doctest::Approx(one.cens + 20.0));
}

TEST_CASE("zero interruptions leave the duration ratios at zero") {
    LoadPointStats p;
    p.customers = 12;
    IndexReport r = compute_indices({p});
    CHECK(r.caidi_h == 0.0);
    CHECK(r.r_s_h == 0.0);
}
