#include "thermoflex/tracking_controller.hpp"

#include <cmath>

namespace thermoflex {

double signal_derivative(double r_now, double r_next, double dt) {
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    return (r_next - r_now) / dt;
}

ControlOutcome control_law(const StateVector& x, double target, double target_dot,
                           double population, const RateSet& rates, const ControllerConfig& cfg,
                           const Interval& admissible) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    const double boundary_mass = x[n - 1] + x[dim - 1];

    ControlOutcome out;
    if (boundary_mass < cfg.x_floor) {
        out.singular = true;
        return out;
    }
    const double cax = population * (rates.alpha * x[n - 1] - rates.beta * x[dim - 1]);
    const double cbx = -population * boundary_mass;
    const double err = output(x, population) - target;
    out.requested_u = -cax / cbx + (-cfg.gain * err + target_dot) / cbx;
    out.u = admissible.clamp(out.requested_u);
    const double tol = 1e-9 * (1.0 + std::fabs(out.u));
    out.saturated = out.requested_u < admissible.lo - tol || out.requested_u > admissible.hi + tol;
    return out;
}

double control_for_ramp(const StateVector& x, double delta_r, double population,
                        const RateSet& rates) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    const double boundary_mass = x[n - 1] + x[dim - 1];
    if (boundary_mass <= 0.0) {
        throw SingularStateError("no controllable mass at the comfort band boundary");
    }
    const double drift = population * (rates.alpha * x[n - 1] - rates.beta * x[dim - 1]);
    return (drift - delta_r) / (population * boundary_mass);
}

ControlOutcome ramp_control(const StateVector& x, double delta_r, double population,
                            const RateSet& rates, double x_floor, const Interval& admissible) {
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    ControlOutcome out;
    if (x[n - 1] + x[dim - 1] < x_floor) {
        out.singular = true;
        return out;
    }
    out.requested_u = control_for_ramp(x, delta_r, population, rates);
    out.u = admissible.clamp(out.requested_u);
    const double tol = 1e-9 * (1.0 + std::fabs(out.u));
    out.saturated = out.requested_u < admissible.lo - tol || out.requested_u > admissible.hi + tol;
    return out;
}

}  // namespace thermoflex
