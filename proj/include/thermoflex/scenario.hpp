#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermoflex/fleet_model.hpp"
#include "thermoflex/observer.hpp"
#include "thermoflex/regulation_signal.hpp"
#include "thermoflex/tracking_controller.hpp"

namespace thermoflex {

struct ObserverSpec {
    bool enabled = false;
    double gamma = 0.5;
    double margin = 0.0;  // <= 0 selects the default
};

struct BuildingSpec {
    std::string name;
    BuildingParams params;
    ControllerConfig controller;
    ObserverSpec observer;
    double r_r = 0.0;   // sold capacity
    double r_b = -1.0;  // sold baseline; < 0 selects the natural steady-state level

    // population * alpha / (alpha + beta) unless overridden.
    double baseline(const RateSet& rates) const {
        if (r_b >= 0.0) return r_b;
        return params.population * rates.alpha / (rates.alpha + rates.beta);
    }
};

enum class SignalKind { csv, synthetic, t50 };

struct SignalSpec {
    SignalKind kind = SignalKind::synthetic;
    std::string path;         // csv
    double volatility = 0.0;  // synthetic
    T50Profile profile;       // t50; empty selects the default profile
    double r_r = -1.0;        // < 0 selects the sum of building capacities
    double r_b = -1.0;        // < 0 selects the sum of building baselines
};

enum class DispatchMode { optimized, proportional };

struct Scenario {
    std::vector<BuildingSpec> buildings;
    SignalSpec signal;
    double dt = 4.0 / 60.0;   // minutes
    double duration = 60.0;   // minutes
    DispatchMode dispatch_mode = DispatchMode::optimized;
    double penalty = 0.0;     // <= 0 selects the default formula
    std::uint64_t seed = 0;
    bool controller_uses_estimate = true;
    std::string base_dir;     // for signal paths relative to the scenario file
};

// Strict JSON loader: unknown keys are rejected so physics parameters cannot
// be silently ignored.
Scenario parse_scenario_json(const std::string& text, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

}  // namespace thermoflex
