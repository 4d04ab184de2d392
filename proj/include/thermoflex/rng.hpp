#pragma once

#include <cmath>
#include <cstdint>

namespace thermoflex {

// Deterministic 64-bit generator (splitmix64). Used instead of <random>
// distributions so that seeded runs are bit-identical across standard
// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller; one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Exponential with given rate.
    double exponential(double rate) {
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return -std::log(u) / rate;
    }

    // Derive an independent stream (e.g. one per building).
    Rng fork(std::uint64_t salt) {
        Rng child(next_u64() ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
        return child;
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace thermoflex
