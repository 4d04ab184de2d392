#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "thermoflex/capability.hpp"
#include "thermoflex/tracking_controller.hpp"

using namespace thermoflex;
using namespace tftest;

TEST_CASE("accumulated-regulation bound closed form") {
    BuildingParams p = balanced_params();  // Nc=1000, tau=60, set band 2, Tg=6
    CHECK(long_term_bound(p) == doctest::Approx(10000.0).epsilon(1e-12));

    BuildingParams zero = balanced_params();
    zero.set_band_width = 0.0;
    zero = finalize_params(zero);
    CHECK(long_term_bound(zero) == doctest::Approx(0.0));

    BuildingParams twice = balanced_params();
    twice.population = 2000.0;
    twice = finalize_params(twice);
    CHECK(long_term_bound(twice) == doctest::Approx(2.0 * long_term_bound(p)).epsilon(1e-12));
}

TEST_CASE("constant-control drain exhausts the bound as the set point pins") {
    // hold consumption above baseline with constant u < 0 and integrate the
    // deviation until the set point reaches its lower limit
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    const double u0 = -0.1;
    const double dt = 1.0 / 15.0;
    StateVector x = steady_state(r, p.n_bins);
    const double baseline = output(x, p.population);
    double t_set = p.set_point;
    double s_accum = 0.0;
    int guard = 0;
    while (t_set > p.set_point_min() && guard++ < 1000000) {
        step_in_place(x, u0, dt, r);
        s_accum += (output(x, p.population) - baseline) * dt;
        t_set += u0 * dt * p.bin_width;
    }
    CHECK(s_accum / long_term_bound(p) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("one-step ramp bounds at the steady state") {
    BuildingParams p = balanced_params();  // alpha = beta = 1, N = 10, Nc = 1000
    RateSet r = derive_rates(p);
    StateVector x = steady_state(r, p.n_bins);
    Interval b = short_term_bounds(x, p, r);
    CHECK(b.hi == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(b.lo == doctest::Approx(-100.0).epsilon(1e-12));

    // brute-force oracle: extremize the output derivative over admissible u
    double best_hi = -1e18;
    double best_lo = 1e18;
    for (int k = 0; k <= 4000; ++k) {
        const double u = -r.beta + (r.alpha + r.beta) * k / 4000.0;
        const double rate = output_rate(x, u, p.population, r);
        best_hi = std::fmax(best_hi, rate);
        best_lo = std::fmin(best_lo, rate);
    }
    CHECK(best_hi == doctest::Approx(b.hi).epsilon(1e-9));
    CHECK(best_lo == doctest::Approx(b.lo).epsilon(1e-9));

    StateVector hollow(20, 0.0);
    hollow[3] = 0.6;
    hollow[13] = 0.4;
    Interval empty = short_term_bounds(hollow, p, r);
    CHECK(empty.lo == doctest::Approx(0.0));
    CHECK(empty.hi == doctest::Approx(0.0));
}

TEST_CASE("thermal and jump-rate forms of the ramp bounds agree") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        BuildingParams p = make_params(3 + static_cast<int>(rng.uniform01() * 10),
                                       rng.uniform(4.0, 20.0), rng.uniform(4.0, 20.0));
        RateSet r = derive_rates(p);
        StateVector x = random_state(rng, p.n_bins);
        Interval thermal = short_term_bounds(x, p, r);
        const std::size_t n = x.size() / 2;
        const double hi = p.population * (r.alpha + r.beta) * x[n - 1];
        const double lo = -p.population * (r.alpha + r.beta) * x.back();
        CHECK(std::fabs(thermal.hi - hi) <= 1e-12 * std::fmax(1.0, std::fabs(hi)));
        CHECK(std::fabs(thermal.lo - lo) <= 1e-12 * std::fmax(1.0, std::fabs(lo)));
    }
}

TEST_CASE("provision thresholds") {
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    const double dt = 1.0 / 15.0;
    Rng rng(17);

    SUBCASE("jump rates bind when the set point has plenty of slack") {
        StateVector x = random_state(rng, p.n_bins);
        Interval thr = provision_thresholds(x, p.set_point, p, r, dt);
        // with the set-point slack inactive the thresholds collapse onto the
        // one-step ramp bounds (the drift terms cancel)
        Interval ramp = short_term_bounds(x, p, r);
        CHECK(thr.hi == doctest::Approx(ramp.hi).epsilon(1e-12));
        CHECK(thr.lo == doctest::Approx(ramp.lo).epsilon(1e-12));
    }

    SUBCASE("set point at the lower limit blocks upward regulation") {
        StateVector x = steady_state(r, p.n_bins);
        Interval thr = provision_thresholds(x, p.set_point_min(), p, r, dt);
        const double drift = output_rate(x, 0.0, p.population, r);
        CHECK(thr.hi == doctest::Approx(drift).epsilon(1e-9));  // no slack below
        CHECK(thr.lo < drift);
    }

    SUBCASE("thresholds are the ramp image of the admissible interval") {
        for (int trial = 0; trial < 100; ++trial) {
            StateVector x = random_state(rng, p.n_bins);
            const double sp = rng.uniform(p.set_point_min(), p.set_point_max());
            Interval u_iv = admissible_control_interval(p, r, sp, dt);
            Interval thr = provision_thresholds(x, sp, p, r, dt);
            // map the threshold endpoints back through the ramp controller
            CHECK(control_for_ramp(x, thr.hi, p.population, r) ==
                  doctest::Approx(u_iv.lo).epsilon(1e-12));
            CHECK(control_for_ramp(x, thr.lo, p.population, r) ==
                  doctest::Approx(u_iv.hi).epsilon(1e-12));
            // cross-check formula: drift plus capped slack times boundary mass
            const std::size_t n = x.size() / 2;
            const double drift = p.population * (r.alpha * x[n - 1] - r.beta * x.back());
            const double slack_lo = (sp - p.set_point_min()) / (dt * p.bin_width);
            const double slack_hi = (p.set_point_max() - sp) / (dt * p.bin_width);
            const double mass = x[n - 1] + x.back();
            const double want_hi = drift + std::fmin(slack_lo, r.beta) * p.population * mass;
            const double want_lo = drift - std::fmin(slack_hi, r.alpha) * p.population * mass;
            CHECK(thr.hi == doctest::Approx(want_hi).epsilon(1e-12));
            CHECK(thr.lo == doctest::Approx(want_lo).epsilon(1e-12));
        }
    }
}

TEST_CASE("spinning reserve indicator") {
    CHECK(spinning_reserve(10.0, -50.0, 60.0) == doctest::Approx(0.0));
    CHECK(spinning_reserve(110.0, -50.0, 60.0) == doctest::Approx(50.0));
    CHECK(spinning_reserve(-80.0, -50.0, 60.0) == doctest::Approx(-30.0));
    CHECK_THROWS_AS(spinning_reserve(0.0, 10.0, -10.0), ParameterError);
}

TEST_CASE("qualification limit") {
    BuildingParams p = balanced_params();  // long term 1000, short term 500 at k=5
    CHECK(qualification_limit(p, 5.0) == doctest::Approx(500.0).epsilon(1e-12));

    // symmetric in the duty halves, decreasing in the slower half
    BuildingParams a = make_params(10, 8.0, 16.0);
    BuildingParams b = make_params(10, 16.0, 8.0);
    CHECK(qualification_limit(a) == doctest::Approx(qualification_limit(b)).epsilon(1e-12));
    BuildingParams slower = make_params(10, 8.0, 24.0);
    CHECK(qualification_limit(slower) < qualification_limit(a));

    // halving the response window halves the short-term term only
    CHECK(qualification_limit(p, 2.5) == doctest::Approx(250.0).epsilon(1e-12));
    BuildingParams long_bound = balanced_params();
    long_bound.set_band_width = 0.2;  // long term 100 binds at both k
    long_bound = finalize_params(long_bound);
    CHECK(qualification_limit(long_bound, 5.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(qualification_limit(long_bound, 2.5) == doctest::Approx(100.0).epsilon(1e-12));

    CHECK_THROWS_AS(qualification_limit(p, 0.0), ParameterError);
    CHECK_THROWS_AS(qualification_limit(p, 6.0), ParameterError);
}

TEST_CASE("slow thermal response trades short-term for long-term capability") {
    // doubling both duty halves doubles tau/Tg: the accumulated bound doubles
    // while the one-step half-width halves
    BuildingParams fast = balanced_params();
    BuildingParams slow = make_params(10, 20.0, 20.0);
    RateSet r_fast = derive_rates(fast);
    RateSet r_slow = derive_rates(slow);
    CHECK(slow.tau / slow.t_gain == doctest::Approx(2.0 * fast.tau / fast.t_gain));
    CHECK(long_term_bound(slow) == doctest::Approx(2.0 * long_term_bound(fast)).epsilon(1e-12));
    StateVector x = steady_state(r_fast, 10);  // same distribution for both
    CHECK(short_term_bounds(x, slow, r_slow).hi ==
          doctest::Approx(0.5 * short_term_bounds(x, fast, r_fast).hi).epsilon(1e-12));
}

TEST_CASE("ramp bounds are tight: 0.99 tracks, 1.01 saturates") {
    Rng rng(31);
    BuildingParams p = reference_params();
    RateSet r = derive_rates(p);
    for (int trial = 0; trial < 100; ++trial) {
        StateVector x = random_state(rng, p.n_bins, 1e-3);
        Interval b = short_term_bounds(x, p, r);
        const double u_hi_ok = control_for_ramp(x, 0.99 * b.hi, p.population, r);
        const double u_hi_bad = control_for_ramp(x, 1.01 * b.hi, p.population, r);
        CHECK(u_hi_ok >= -r.beta);
        CHECK(u_hi_bad < -r.beta);
        const double u_lo_ok = control_for_ramp(x, 0.99 * b.lo, p.population, r);
        const double u_lo_bad = control_for_ramp(x, 1.01 * b.lo, p.population, r);
        CHECK(u_lo_ok <= r.alpha);
        CHECK(u_lo_bad > r.alpha);
    }
}

TEST_CASE("capability report bundles the per-tick feedback message") {
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    StateVector x = steady_state(r, p.n_bins);
    CapabilityReport rep = capability_report(x, p.set_point, p, r, 1.0 / 15.0);
    CHECK(rep.s_max == doctest::Approx(10000.0));
    CHECK(rep.ramp_hi == doctest::Approx(100.0));
    CHECK(rep.ramp_lo == doctest::Approx(-100.0));
    CHECK(rep.dr_min <= rep.dr_max);
    CHECK(rep.r_qual == doctest::Approx(500.0));
    CHECK(rep.ramp_lo <= 0.0);
    CHECK(rep.ramp_hi >= 0.0);
}
