#pragma once

#include <unordered_map>

#include "thermoflex/fleet_model.hpp"

namespace thermoflex {

struct ObserverConfig {
    double gamma = 0.5;   // convergence-margin fraction, in (0, 1)
    double margin = 0.0;  // saturation margin; <= 0 selects 0.05 * min(alpha, beta)
};

// Clamp u into the saturation-avoiding set [-beta + margin, alpha - margin].
double restricted_control(double u, const RateSet& r, double margin);

// Guaranteed contraction rate gamma * min(beta + u, alpha - u).
double epsilon_rate(double u, const RateSet& r, double gamma);

// Output-injection gain on the last state: the determinant of
// A + Bu - L C + eps I is linear in L, so solve for its sign-change root and
// step 10% past it. Asserts the alternating leading-minor signs afterward.
// Throws GainSelectionError when the determinant is insensitive to L.
double select_gain(const BuildingParams& p, const RateSet& r, double u, double eps);

// State estimator for one building: Euler copy of the plant plus innovation
// injection on the last state, gain refreshed every step.
class Observer {
public:
    Observer(const BuildingParams& params, const RateSet& rates, ObserverConfig cfg);

    const StateVector& estimate() const { return x_hat_; }
    double gain() const { return l_gain_; }
    double epsilon() const { return epsilon_; }
    double margin() const { return margin_; }
    double gamma() const { return gamma_; }

    double restrict_control(double u) const { return restricted_control(u, rates_, margin_); }

    // u must already lie in the restricted set; y_measured is the aggregate
    // consumption of the true plant.
    void step(double u, double y_measured, double dt);

private:
    BuildingParams params_;
    RateSet rates_;
    StateVector x_hat_;
    double gamma_ = 0.5;
    double margin_ = 0.0;
    double l_gain_ = 0.0;
    double epsilon_ = 0.0;
    std::unordered_map<long long, double> gain_cache_;
};

}  // namespace thermoflex
