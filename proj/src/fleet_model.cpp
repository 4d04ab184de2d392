#include "thermoflex/fleet_model.hpp"

#include <cmath>
#include <sstream>

#include "thermoflex/log.hpp"

namespace thermoflex {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw ParameterError(what);
}

}  // namespace

BuildingParams finalize_params(BuildingParams p) {
    require(p.n_bins >= 1, "n_bins must be >= 1");
    require(p.t_on > 0.0, "t_on must be positive");
    require(p.t_off > 0.0, "t_off must be positive");
    require(p.population > 0.0, "population must be positive");
    require(p.tau > 0.0, "tau must be positive");
    require(p.set_point > 0.0, "set_point must be positive");
    require(p.set_band_width >= 0.0, "set_band_width must be non-negative");
    require(p.rated_power > 0.0, "rated_power must be positive");

    if (p.bin_width > 0.0 && p.band_width > 0.0) {
        const double expect = p.n_bins * p.bin_width;
        if (std::fabs(p.band_width - expect) > 1e-9 * std::fabs(expect)) {
            throw ParameterError("band_width != n_bins * bin_width");
        }
    } else if (p.bin_width > 0.0) {
        p.band_width = p.n_bins * p.bin_width;
    } else if (p.band_width > 0.0) {
        p.bin_width = p.band_width / p.n_bins;
    } else {
        throw ParameterError("one of bin_width or band_width must be given");
    }

    const double rate_sum = p.band_width * (1.0 / p.t_on + 1.0 / p.t_off);  // r_on + r_off
    if (p.t_gain <= 0.0) {
        p.t_gain = p.tau * rate_sum;
    } else {
        const double lhs = p.t_gain / p.tau;
        if (std::fabs(lhs - rate_sum) > 1e-6 * std::fabs(rate_sum)) {
            std::ostringstream msg;
            msg << "thermal consistency violated: r_on + r_off = T_g/tau requires T_g = "
                << p.tau * rate_sum << ", got " << p.t_gain;
            throw ParameterError(msg.str());
        }
    }
    return p;
}

RateSet derive_rates(const BuildingParams& p) {
    const BuildingParams checked = finalize_params(p);
    RateSet r;
    r.alpha = checked.n_bins / checked.t_off;
    r.beta = checked.n_bins / checked.t_on;
    r.r_off = checked.band_width / checked.t_off;
    r.r_on = checked.band_width / checked.t_on;
    return r;
}

SystemMatrices build_matrices(const BuildingParams& p, const RateSet& r) {
    const int n = p.n_bins;
    const int dim = 2 * n;
    SystemMatrices m;
    m.n_bins = n;
    m.a_mat = Matrix(dim, dim);
    m.b_mat = Matrix(dim, dim);
    m.c_row.assign(static_cast<std::size_t>(dim), 0.0);

    // Off-process columns: outflow alpha - u; on-process columns: beta + u,
    // with the last on column wrapping to state 1.
    for (int j = 0; j < n; ++j) {
        const int next = j + 1;  // j = n-1 feeds the first on bin
        m.a_mat(j, j) = -r.alpha;
        m.a_mat(next, j) = r.alpha;
        m.b_mat(j, j) = 1.0;
        m.b_mat(next, j) = -1.0;
    }
    for (int j = n; j < dim; ++j) {
        const int next = (j + 1) % dim;
        m.a_mat(j, j) = -r.beta;
        m.a_mat(next, j) = r.beta;
        m.b_mat(j, j) = -1.0;
        m.b_mat(next, j) = 1.0;
    }
    for (int j = n; j < dim; ++j) m.c_row[static_cast<std::size_t>(j)] = p.population;
    return m;
}

StateVector steady_state(const RateSet& r, int n_bins) {
    if (r.alpha <= 0.0 || r.beta <= 0.0) throw ParameterError("rates must be positive");
    StateVector x(static_cast<std::size_t>(2 * n_bins));
    const double denom = n_bins * (r.alpha + r.beta);
    for (int i = 0; i < n_bins; ++i) x[static_cast<std::size_t>(i)] = r.beta / denom;
    for (int i = n_bins; i < 2 * n_bins; ++i) x[static_cast<std::size_t>(i)] = r.alpha / denom;
    return x;
}

double output(const StateVector& x, double population) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    double on_mass = 0.0;
    for (std::size_t i = n; i < dim; ++i) on_mass += x[i];
    return population * on_mass;
}

double output_rate(const StateVector& x, double u, double population, const RateSet& r) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    return population * ((r.alpha - u) * x[n - 1] - (r.beta + u) * x[dim - 1]);
}

void apply_generator(const StateVector& x, double u, const RateSet& r, std::vector<double>& dx) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    dx.resize(dim);
    const double a = r.alpha - u;
    const double b = r.beta + u;
    dx[0] = -a * x[0] + b * x[dim - 1];
    for (std::size_t i = 1; i < n; ++i) dx[i] = a * (x[i - 1] - x[i]);
    dx[n] = a * x[n - 1] - b * x[n];
    for (std::size_t i = n + 1; i < dim; ++i) dx[i] = b * (x[i - 1] - x[i]);
}

void project_to_simplex(StateVector& x, StepInfo* info) {
    double min_entry = 0.0;
    double sum = 0.0;
    for (double v : x) {
        if (v < min_entry) min_entry = v;
        sum += v;
    }
    if (info != nullptr) {
        info->pre_clamp_min = min_entry;
        info->pre_renorm_sum = sum;
        info->clamped = min_entry < 0.0;
    }
    if (min_entry < -1e-12) {
        log::write(log::Level::warn, "state entry clamped at %.3e", min_entry);
    }
    double clamped_sum = 0.0;
    for (double& v : x) {
        if (v < 0.0) v = 0.0;
        clamped_sum += v;
    }
    if (clamped_sum <= 0.0) throw ConfigError("state vector collapsed to zero mass");
    const double inv = 1.0 / clamped_sum;
    for (double& v : x) v *= inv;
}

void step_in_place(StateVector& x, double u, double dt, const RateSet& r, StepInfo* info) {
    if (u < -r.beta || u > r.alpha) {
        std::ostringstream msg;
        msg << "control u=" << u << " outside [-beta, alpha] = [" << -r.beta << ", " << r.alpha
            << "]; the jump process would stop being a Markov chain";
        throw ControlSaturationError(msg.str());
    }
    if (dt * (r.alpha + r.beta) >= 0.5) {
        std::ostringstream msg;
        msg << "tick dt=" << dt << " violates dt*(alpha+beta) < 0.5 with alpha+beta="
            << r.alpha + r.beta;
        throw ConfigError(msg.str());
    }
    static thread_local std::vector<double> dx;
    apply_generator(x, u, r, dx);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * dx[i];
    project_to_simplex(x, info);
}

StateVector step(const StateVector& x, double u, double dt, const RateSet& r, StepInfo* info) {
    StateVector next = x;
    step_in_place(next, u, dt, r, info);
    return next;
}

Interval admissible_control_interval(const BuildingParams& p, const RateSet& r,
                                     double current_set_point, double dt) {
    if (current_set_point < p.set_point_min() - 1e-12 ||
        current_set_point > p.set_point_max() + 1e-12) {
        throw ParameterError("current set point outside the allowed band");
    }
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    const double scale = dt * p.bin_width;
    Interval iv;
    iv.lo = std::fmax((p.set_point_min() - current_set_point) / scale, -r.beta);
    iv.hi = std::fmin((p.set_point_max() - current_set_point) / scale, r.alpha);
    // Zero shift is always admissible when the set point is inside the band.
    if (iv.lo > 0.0 || iv.hi < 0.0) throw ConfigError("admissible control interval is empty");
    return iv;
}

}  // namespace thermoflex
