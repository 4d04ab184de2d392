#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "thermoflex/linalg.hpp"
#include "thermoflex/observer.hpp"

using namespace thermoflex;
using namespace tftest;

namespace {

// Dense A + Bu - LC for certificate checks.
Matrix error_dynamics(const BuildingParams& p, const RateSet& r, double u, double l_gain) {
    SystemMatrices m = build_matrices(p, r);
    const int dim = 2 * p.n_bins;
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = m.a_mat(i, j) + m.b_mat(i, j) * u;
    for (int j = p.n_bins; j < dim; ++j) g(dim - 1, j) -= l_gain * p.population;
    return g;
}

struct ErrorRun {
    double converge_time = -1.0;  // first time ||e|| < 1e-3
    int monotonicity_violations = 0;
};

// Plant at its steady state, estimate from uniform; wandering restricted
// control; tracks the exponentially weighted error norm.
ErrorRun run_error_decay(const BuildingParams& p, double gamma, double minutes) {
    RateSet r = derive_rates(p);
    ObserverConfig cfg;
    cfg.gamma = gamma;
    Observer obs(p, r, cfg);
    StateVector x = steady_state(r, p.n_bins);
    const double dt = 1.0 / 15.0;
    Rng wander(7);
    double u = 0.0;
    double integ_eps = 0.0;
    double weighted_prev = -1.0;
    ErrorRun res;
    const int ticks = static_cast<int>(minutes * 15);
    for (int k = 0; k < ticks; ++k) {
        u = 0.6 * u + 0.1 * wander.normal() * std::fmin(r.alpha, r.beta);
        u = obs.restrict_control(u);
        const double y = output(x, p.population);
        step_in_place(x, u, dt, r);
        obs.step(u, y, dt);
        integ_eps += obs.epsilon() * dt;
        double err2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - obs.estimate()[i];
            err2 += d * d;
        }
        const double weighted = std::exp(integ_eps) * err2;
        if (weighted_prev >= 0.0 && weighted > weighted_prev + 1e-9) {
            ++res.monotonicity_violations;
        }
        weighted_prev = weighted;
        if (res.converge_time < 0.0 && std::sqrt(err2) < 1e-3) {
            res.converge_time = (k + 1) * dt;
        }
    }
    return res;
}

}  // namespace

TEST_CASE("restricted control set") {
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    const double margin = 0.05;
    CHECK(restricted_control(0.3, r, margin) == doctest::Approx(0.3));
    CHECK(restricted_control(r.alpha, r, margin) == doctest::Approx(r.alpha - margin));
    CHECK(restricted_control(-r.beta, r, margin) == doctest::Approx(-r.beta + margin));
    CHECK_THROWS_AS(restricted_control(0.0, r, 0.0), ParameterError);
}

TEST_CASE("contraction rate") {
    BuildingParams p = balanced_params();  // alpha = beta = 1
    RateSet r = derive_rates(p);
    CHECK(epsilon_rate(0.0, r, 0.5) == doctest::Approx(0.5));
    const double margin = 0.05;
    CHECK(epsilon_rate(r.alpha - margin, r, 0.5) == doctest::Approx(0.5 * margin));
    // symmetric about zero when the rates match
    for (double u : {0.1, 0.45, 0.8}) {
        CHECK(epsilon_rate(u, r, 0.3) == doctest::Approx(epsilon_rate(-u, r, 0.3)));
    }
}

TEST_CASE("two-state gain by hand") {
    // alpha = beta = 1, Nc = 1, u = 0, eps = 0.5: det(Atilde) = 0.5 L - 0.75,
    // root at 1.5, chosen 10% past it
    BuildingParams p = make_params(1, 1.0, 1.0, /*population=*/1.0);
    RateSet r = derive_rates(p);
    const double eps = epsilon_rate(0.0, r, 0.5);
    const double l = select_gain(p, r, 0.0, eps);
    CHECK(l == doctest::Approx(1.65).epsilon(1e-9));

    // determinant sign with the promised relative margin
    Matrix g = error_dynamics(p, r, 0.0, l);
    for (int i = 0; i < 2; ++i) g(i, i) += eps;
    CHECK(lu_determinant(g) == doctest::Approx(0.075).epsilon(1e-9));
}

TEST_CASE("leading minors alternate in sign at the chosen gain") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        BuildingParams p = make_params(2 + static_cast<int>(rng.uniform01() * 7),
                                       rng.uniform(4.0, 15.0), rng.uniform(4.0, 15.0));
        RateSet r = derive_rates(p);
        const double margin = 0.05 * std::fmin(r.alpha, r.beta);
        const double u = rng.uniform(-r.beta + margin, r.alpha - margin);
        const double eps = epsilon_rate(u, r, 0.5);
        const double l = select_gain(p, r, u, eps);  // asserts the minors internally

        Matrix g = error_dynamics(p, r, u, l);
        for (int i = 0; i < 2 * p.n_bins; ++i) g(i, i) += eps;
        std::vector<double> minors = leading_minors(g);
        for (std::size_t i = 0; i < minors.size(); ++i) {
            CHECK(((i % 2 == 0) ? -minors[i] : minors[i]) > 0.0);
        }
    }
}

TEST_CASE("random-vector contraction certificate") {
    // moderate dimension and a conservative gamma: sampled directions satisfy
    // the strict quadratic-form bound
    Rng rng(4242);
    for (int cfg_i = 0; cfg_i < 100; ++cfg_i) {
        BuildingParams p = make_params(10, rng.uniform(4.0, 15.0), rng.uniform(4.0, 15.0));
        RateSet r = derive_rates(p);
        const double margin = 0.05 * std::fmin(r.alpha, r.beta);
        const double u = rng.uniform(-r.beta + margin, r.alpha - margin);
        const double eps = epsilon_rate(u, r, 0.1);
        const double l = select_gain(p, r, u, eps);
        Matrix g = error_dynamics(p, r, u, l);
        const int dim = 2 * p.n_bins;
        double worst = -1e300;
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> e(static_cast<std::size_t>(dim));
            double norm2 = 0.0;
            for (double& v : e) {
                v = rng.normal();
                norm2 += v * v;
            }
            const std::vector<double> ge = matvec(g, e);
            double form = 0.0;
            for (int i = 0; i < dim; ++i) form += e[static_cast<std::size_t>(i)] * ge[static_cast<std::size_t>(i)];
            worst = std::fmax(worst, form / norm2);
        }
        CHECK(worst < -eps);
    }
}

TEST_CASE("perfect estimate stays perfect") {
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    ObserverConfig cfg;
    Observer obs(p, r, cfg);
    StateVector x = steady_state(r, p.n_bins);
    // overwrite the estimate with the truth via convergence shortcut:
    // run the plant from the observer's own initial state instead
    StateVector plant(x.size(), 1.0 / 20.0);
    const double dt = 1.0 / 15.0;
    for (int k = 0; k < 600; ++k) {
        const double u = 0.3 * std::sin(0.05 * k);
        const double u_r = obs.restrict_control(u);
        const double y = output(plant, p.population);
        step_in_place(plant, u_r, dt, r);
        obs.step(u_r, y, dt);
        CHECK(linf_distance(plant, obs.estimate()) < 1e-12);
    }
}

TEST_CASE("estimate stays on the simplex") {
    BuildingParams p = make_params(5, 4.0, 6.0);
    RateSet r = derive_rates(p);
    ObserverConfig cfg;
    cfg.gamma = 0.2;
    Observer obs(p, r, cfg);
    StateVector x = steady_state(r, p.n_bins);
    const double dt = 1.0 / 15.0;
    Rng rng(3);
    for (int k = 0; k < 900; ++k) {
        const double u = obs.restrict_control(rng.uniform(-r.beta, r.alpha));
        const double y = output(x, p.population);
        step_in_place(x, u, dt, r);
        obs.step(u, y, dt);
        double sum = 0.0;
        for (double v : obs.estimate()) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("error converges and the weighted norm is monotone") {
    BuildingParams p10 = make_params(5, 4.0, 6.0);  // 10-minute duty cycle
    ErrorRun run10 = run_error_decay(p10, 0.2, 60.0);
    CHECK(run10.monotonicity_violations == 0);
    CHECK(run10.converge_time > 0.0);
    CHECK(run10.converge_time < 40.0);
}

TEST_CASE("shorter duty cycles converge faster") {
    BuildingParams p10 = make_params(5, 4.0, 6.0);    // 10-minute duty cycle
    BuildingParams p20 = make_params(5, 8.0, 12.0);   // 20-minute duty cycle
    ErrorRun run10 = run_error_decay(p10, 0.2, 90.0);
    ErrorRun run20 = run_error_decay(p20, 0.2, 90.0);
    CHECK(run10.converge_time > 0.0);
    CHECK(run20.converge_time > 0.0);
    CHECK(run10.converge_time < run20.converge_time);
}

TEST_CASE("observer rejects saturated controls and bad configs") {
    BuildingParams p = balanced_params();
    RateSet r = derive_rates(p);
    ObserverConfig cfg;
    Observer obs(p, r, cfg);
    CHECK_THROWS_AS(obs.step(r.alpha, 500.0, 1.0 / 15.0), ControlSaturationError);

    ObserverConfig bad_gamma;
    bad_gamma.gamma = 1.5;
    CHECK_THROWS_AS(Observer(p, r, bad_gamma), ConfigError);
    ObserverConfig bad_margin;
    bad_margin.margin = 0.9 * std::fmin(r.alpha, r.beta);
    CHECK_THROWS_AS(Observer(p, r, bad_margin), ConfigError);
}
