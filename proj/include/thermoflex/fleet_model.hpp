#pragma once

#include <vector>

#include "thermoflex/errors.hpp"
#include "thermoflex/linalg.hpp"

namespace thermoflex {

// One homogeneous appliance fleet behind a building operator.
//
// Conventions used throughout the library:
//   time        minutes
//   temperature degrees C
//   power       number of running appliances (rated_power converts to kW
//               in reports only)
//   control u   set-point shift rate divided by the bin width, 1/min
struct BuildingParams {
    int n_bins = 0;             // temperature bins per duty half
    double bin_width = 0.0;     // deg C per bin
    double band_width = 0.0;    // comfort band, = n_bins * bin_width
    double set_band_width = 0.0;// user-allowed set point band
    double set_point = 0.0;     // nominal set point
    double t_on = 0.0;          // minutes
    double t_off = 0.0;         // minutes
    double population = 0.0;    // appliances in the pool
    double tau = 0.0;           // effective thermal constant, minutes
    double t_gain = 0.0;        // appliance temperature gain; derived when <= 0
    double rated_power = 1.0;   // kW per appliance, reporting only

    double set_point_min() const { return set_point - 0.5 * set_band_width; }
    double set_point_max() const { return set_point + 0.5 * set_band_width; }
};

// Fills whichever of bin_width/band_width is missing, derives t_gain from
// tau * band_width * (1/t_on + 1/t_off) when not supplied, and validates all
// invariants. Throws ParameterError on inconsistency.
BuildingParams finalize_params(BuildingParams p);

struct RateSet {
    double alpha = 0.0;   // off-process transition rate, 1/min
    double beta = 0.0;    // on-process transition rate, 1/min
    double r_on = 0.0;    // cooling rate, deg C/min
    double r_off = 0.0;   // warming rate, deg C/min
};

// alpha = N/t_off, beta = N/t_on, r_off = band/t_off, r_on = band/t_on.
// Re-validates the duty-cycle/thermal consistency of the parameters.
RateSet derive_rates(const BuildingParams& p);

// Probability distribution over the 2N states (first N off, last N on).
using StateVector = std::vector<double>;

struct SystemMatrices {
    Matrix a_mat;                 // 2N x 2N drift generator
    Matrix b_mat;                 // 2N x 2N control direction
    std::vector<double> c_row;    // output row [0 x N, Nc x N]
    int n_bins = 0;
};

SystemMatrices build_matrices(const BuildingParams& p, const RateSet& r);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

// Uniform-within-half steady state of the uncontrolled chain.
StateVector steady_state(const RateSet& r, int n_bins);

// Aggregated consumption y = Cx.
double output(const StateVector& x, double population);

// d(Cx)/dt under control u: Nc * [(alpha-u) x_N - (beta+u) x_2N].
// The on-block flows telescope, so only the boundary bins enter.
double output_rate(const StateVector& x, double u, double population, const RateSet& r);

// dx = (A + B u) x, evaluated structurally in O(N).
void apply_generator(const StateVector& x, double u, const RateSet& r, std::vector<double>& dx);

struct StepInfo {
    double pre_clamp_min = 0.0;   // most negative raw entry after the Euler update
    double pre_renorm_sum = 1.0;  // raw sum before the simplex projection
    bool clamped = false;
};

// Forward Euler update with simplex projection (clamp negatives, renormalize).
// Preconditions: u in [-beta, alpha], dt*(alpha+beta) < 0.5.
void step_in_place(StateVector& x, double u, double dt, const RateSet& r, StepInfo* info = nullptr);
StateVector step(const StateVector& x, double u, double dt, const RateSet& r, StepInfo* info = nullptr);

// Clamp negatives to zero and renormalize to sum one.
void project_to_simplex(StateVector& x, StepInfo* info = nullptr);

// Control rates that keep the next set point inside the allowed band and the
// jump rates non-negative:
//   [max((Tmin - Tset)/(dt*delta), -beta), min((Tmax - Tset)/(dt*delta), alpha)]
Interval admissible_control_interval(const BuildingParams& p, const RateSet& r,
                                     double current_set_point, double dt);

}  // namespace thermoflex
