#pragma once

#include "thermoflex/fleet_model.hpp"

namespace thermoflex {

struct ControllerConfig {
    double gain = 1.0;      // error decay rate K, 1/min
    double x_floor = 1e-9;  // boundary-mass threshold for the singular set
};

struct ControlOutcome {
    double u = 0.0;            // applied control after clamping
    double requested_u = 0.0;  // raw feedback-linearization output
    bool saturated = false;
    bool singular = false;
};

// Finite-difference derivative of the sampled reference signal.
double signal_derivative(double r_now, double r_next, double dt);

// Output-tracking control: cancels the drift C A x and imposes
// d(Cx)/dt = -K (Cx - target) + target_dot. Degenerates to u = 0 with the
// singular flag when the boundary mass x_N + x_2N falls below x_floor.
ControlOutcome control_law(const StateVector& x, double target, double target_dot,
                           double population, const RateSet& rates, const ControllerConfig& cfg,
                           const Interval& admissible);

// The unique u with d(Cx)/dt = delta_r:
//   u = [Nc (alpha x_N - beta x_2N) - delta_r] / [Nc (x_N + x_2N)]
// Throws SingularStateError when the boundary mass vanishes.
double control_for_ramp(const StateVector& x, double delta_r, double population,
                        const RateSet& rates);

// Flagging wrapper around control_for_ramp used by the tick loop.
ControlOutcome ramp_control(const StateVector& x, double delta_r, double population,
                            const RateSet& rates, double x_floor, const Interval& admissible);

}  // namespace thermoflex
