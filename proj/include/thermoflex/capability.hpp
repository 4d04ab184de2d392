#pragma once

#include "thermoflex/fleet_model.hpp"

namespace thermoflex {

// Per-tick upward feedback message from a building to the system operator.
struct CapabilityReport {
    double s_max = 0.0;    // accumulated-regulation bound, appliance-min
    double ramp_lo = 0.0;  // one-step ramp bounds at the current state, 1/min-scaled power
    double ramp_hi = 0.0;
    double dr_min = 0.0;   // provision thresholds at the current state and set point
    double dr_max = 0.0;
    double r_qual = 0.0;   // qualification limit, power
};

// Nc * tau * set_band / (2 * t_gain): the most accumulated regulation the
// set-point band can absorb.
double long_term_bound(const BuildingParams& p);

// One-step ramp bounds from the boundary-bin populations:
//   [-N x_2N Nc Tg / (tau band), +N x_N Nc Tg / (tau band)]
Interval short_term_bounds(const StateVector& x, const BuildingParams& p, const RateSet& r);

// Reserve provision thresholds [dR_min, dR_max]: the image of the admissible
// control interval under the ramp map u -> Nc[(alpha-u)x_N - (beta+u)x_2N].
Interval provision_thresholds(const StateVector& x, double current_set_point,
                              const BuildingParams& p, const RateSet& r, double dt);

// Spinning generation needed when the demand ramp falls outside [dr_min, dr_max].
double spinning_reserve(double delta_p, double dr_min, double dr_max);

// Largest sellable regulation capacity that survives the 50-minute
// qualification test with a k-minute rate of response:
//   min{ Nc tau set_band / (20 Tg), k Nc / max(t_on, t_off) }
double qualification_limit(const BuildingParams& p, double k_minutes = 5.0);

CapabilityReport capability_report(const StateVector& x, double current_set_point,
                                   const BuildingParams& p, const RateSet& r, double dt,
                                   double k_minutes = 5.0);

}  // namespace thermoflex
