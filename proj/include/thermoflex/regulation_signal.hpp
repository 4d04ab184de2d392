#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "thermoflex/errors.hpp"

namespace thermoflex {

// Regulation request series R(t): deviation from the sold baseline, sampled
// on a uniform grid starting at t = 0.
struct RegulationSignal {
    std::vector<double> samples;
    double dt = 0.0;   // minutes between samples
    double r_r = 0.0;  // sold capacity; |R| <= r_r
    double r_b = 0.0;  // sold baseline (aggregate)
    int clip_count = 0;

    // Sample with the last value held past the end.
    double at(std::size_t k) const {
        if (samples.empty()) return 0.0;
        return k < samples.size() ? samples[k] : samples.back();
    }
    double duration() const { return samples.empty() ? 0.0 : dt * (samples.size() - 1); }
};

// Two-column CSV "t_s,reg_kw" (time in seconds, optional header), resampled
// onto the dt grid by linear interpolation and clipped into [-r_r, r_r].
RegulationSignal ingest_signal(const std::string& path, double dt, double r_r, double r_b);

// Piecewise-linear qualification profile over [0, 50] minutes; values are
// fractions of the tested capacity in [-1, 1].
struct T50Profile {
    std::vector<std::pair<double, double>> knots;  // (minute, fraction)
};

// Ramp to +1 over 5 min, hold 5, back to 0, settle, then the mirrored
// negative excursion; holds are the sustained-response windows.
T50Profile default_t50_profile();

RegulationSignal generate_t50(double r_r, const T50Profile& profile, double dt, double r_b);

// Seeded bounded random walk reflected at +-r_r; increments have standard
// deviation volatility * dt.
RegulationSignal generate_synthetic(std::uint64_t seed, double r_r, double duration, double dt,
                                    double volatility, double r_b);

}  // namespace thermoflex
