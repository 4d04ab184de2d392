#pragma once

#include <vector>

#include "thermoflex/capability.hpp"
#include "thermoflex/fleet_model.hpp"

namespace thermoflex {

// What one building reports upward each tick: the four state components that
// drive its boundary dynamics, plus its standing market data.
struct BuildingSnapshot {
    BuildingParams params;
    RateSet rates;
    double x_nm1 = 0.0;   // x_{N-1}
    double x_n = 0.0;     // x_N
    double x_2nm1 = 0.0;  // x_{2N-1}
    double x_2n = 0.0;    // x_{2N}
    double set_point = 0.0;
    double baseline = 0.0;    // sold baseline consumption
    double capacity = 0.0;    // sold regulation capacity
    double output_now = 0.0;  // measured aggregate consumption
};

struct DispatchProblem {
    std::vector<BuildingSnapshot> buildings;
    double delta_p = 0.0;  // demanded one-step ramp
    double penalty = 0.0;  // spinning penalty weight M; <= 0 selects the default
    double dt = 0.0;
};

enum class DispatchMethod { optimized, proportional, oracle };

struct BuildingDispatch {
    double u = 0.0;
    double delta_r = 0.0;
    double width = 0.0;  // predicted next-tick capability width
};

struct DispatchSolution {
    std::vector<BuildingDispatch> buildings;
    double p_spin = 0.0;
    double objective = 0.0;
    DispatchMethod method = DispatchMethod::optimized;
};

// Next-tick capability width for one building under control u: boundary mass
// stepped one tick times the sum of the two capped slack rates.
double capability_width(const BuildingSnapshot& b, double u, double dt);

// 1e3 / (max_i dR_max^i)^2: one capacity-sized unit of spinning reserve
// outweighs any achievable width gain.
double default_penalty(const DispatchProblem& problem);

// Shared objective: sum of next-tick widths minus M * P_spin^2. P_spin is the
// balance residual delta_p - sum(delta_r).
double dispatch_objective(const DispatchProblem& problem, const std::vector<double>& us,
                          double* p_spin_out = nullptr);

// Per-building box of admissible controls: jump-rate and set-point limits
// intersected with the sold consumption band.
Interval dispatch_control_box(const BuildingSnapshot& b, double dt);

// Width-maximizing dispatch: projected exact coordinate ascent over the
// control boxes, eight random starts plus the zero start.
DispatchSolution solve_dispatch(const DispatchProblem& problem);

// Exhaustive grid search, m <= 3 only. Validation oracle for solve_dispatch.
DispatchSolution solve_dispatch_oracle(const DispatchProblem& problem, int grid_points);

// Split delta_p proportionally to sold capacities, clamp each share to the
// provision thresholds, and push the residual into spinning reserve.
DispatchSolution proportional_dispatch(const DispatchProblem& problem);

}  // namespace thermoflex
