#include "thermoflex/regulation_signal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "thermoflex/log.hpp"
#include "thermoflex/rng.hpp"

namespace thermoflex {

namespace {

bool parse_double(const std::string& field, double* out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    *out = v;
    return true;
}

double clip_into(double v, double bound, int* clips) {
    if (v > bound) {
        ++*clips;
        return bound;
    }
    if (v < -bound) {
        ++*clips;
        return -bound;
    }
    return v;
}

}  // namespace

RegulationSignal ingest_signal(const std::string& path, double dt, double r_r, double r_b) {
    if (dt <= 0.0) throw ConfigError("signal dt must be positive");
    if (r_r < 0.0) throw ParameterError("capacity r_r must be non-negative");
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open signal file: " + path);

    std::vector<double> times;   // minutes
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == '\n')) {
            trimmed.pop_back();
        }
        if (trimmed.empty()) continue;
        const std::size_t comma = trimmed.find(',');
        if (comma == std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected two comma-separated columns";
            throw ParseError(msg.str());
        }
        const std::string f0 = trimmed.substr(0, comma);
        const std::string f1 = trimmed.substr(comma + 1);
        if (f1.find(',') != std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected exactly two columns";
            throw ParseError(msg.str());
        }
        double t_s = 0.0;
        double v = 0.0;
        if (!parse_double(f0, &t_s)) {
            if (times.empty() && line_no == 1) continue;  // header row
            std::ostringstream msg;
            msg << path << ":" << line_no << ": non-numeric time '" << f0 << "'";
            throw ParseError(msg.str());
        }
        if (!parse_double(f1, &v)) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": non-numeric value '" << f1 << "'";
            throw ParseError(msg.str());
        }
        const double t_min = t_s / 60.0;
        if (!times.empty() && t_min <= times.back()) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": non-monotone time";
            throw ParseError(msg.str());
        }
        times.push_back(t_min);
        values.push_back(v);
    }
    if (times.empty()) throw ParseError("empty signal file: " + path);

    RegulationSignal sig;
    sig.dt = dt;
    sig.r_r = r_r;
    sig.r_b = r_b;
    const double t0 = times.front();
    const double span = times.back() - t0;
    const std::size_t count = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;
    sig.samples.reserve(count);
    std::size_t seg = 0;
    int clips = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        while (seg + 1 < times.size() && times[seg + 1] < t) ++seg;
        double v;
        if (seg + 1 >= times.size()) {
            v = values.back();
        } else {
            const double gap = times[seg + 1] - times[seg];
            const double w = (t - times[seg]) / gap;
            if (w < 1e-12) {
                v = values[seg];
            } else if (w > 1.0 - 1e-12) {
                v = values[seg + 1];
            } else {
                v = values[seg] + w * (values[seg + 1] - values[seg]);
            }
        }
        sig.samples.push_back(clip_into(v, r_r, &clips));
    }
    sig.clip_count = clips;
    if (clips > 0) {
        log::write(log::Level::warn, "%d signal samples clipped into [-%g, %g]", clips, r_r, r_r);
    }
    return sig;
}

T50Profile default_t50_profile() {
    // Five-minute ramps; the holds run 7.5 minutes so the accumulated request
    // reaches ten capacity-minutes exactly at the end of the positive hold,
    // which is what the closed-form qualification limit assumes.
    T50Profile p;
    p.knots = {{0.0, 0.0},   {5.0, 1.0},   {12.5, 1.0}, {22.5, -1.0},
               {30.0, -1.0}, {35.0, 0.0},  {50.0, 0.0}};
    return p;
}

RegulationSignal generate_t50(double r_r, const T50Profile& profile, double dt, double r_b) {
    if (dt <= 0.0) throw ConfigError("signal dt must be positive");
    if (r_r < 0.0) throw ParameterError("capacity r_r must be non-negative");
    if (profile.knots.size() < 2) throw ParameterError("qualification profile needs >= 2 knots");
    if (profile.knots.front().first != 0.0) {
        throw ParameterError("qualification profile must start at t=0");
    }
    for (std::size_t i = 0; i < profile.knots.size(); ++i) {
        const auto& [t, frac] = profile.knots[i];
        if (t < 0.0 || t > 50.0) throw ParameterError("qualification profile knot outside [0, 50]");
        if (i > 0 && t <= profile.knots[i - 1].first) {
            throw ParameterError("qualification profile knots must be strictly increasing in time");
        }
        if (std::fabs(frac) > 1.0 + 1e-12) {
            throw ParameterError("qualification profile exceeds the tested capacity");
        }
    }

    RegulationSignal sig;
    sig.dt = dt;
    sig.r_r = r_r;
    sig.r_b = r_b;
    const double t_end = profile.knots.back().first;
    const std::size_t count = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
    sig.samples.reserve(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = std::fmin(static_cast<double>(k) * dt, t_end);
        while (seg + 2 < profile.knots.size() && profile.knots[seg + 1].first < t) ++seg;
        const auto& [ta, fa] = profile.knots[seg];
        const auto& [tb, fb] = profile.knots[seg + 1];
        const double w = (t - ta) / (tb - ta);
        const double frac = w <= 0.0 ? fa : (w >= 1.0 ? fb : fa + w * (fb - fa));
        sig.samples.push_back(frac * r_r);
    }
    return sig;
}

RegulationSignal generate_synthetic(std::uint64_t seed, double r_r, double duration, double dt,
                                    double volatility, double r_b) {
    if (dt <= 0.0) throw ConfigError("signal dt must be positive");
    if (volatility < 0.0) throw ParameterError("volatility must be non-negative");
    if (r_r < 0.0) throw ParameterError("capacity r_r must be non-negative");
    RegulationSignal sig;
    sig.dt = dt;
    sig.r_r = r_r;
    sig.r_b = r_b;
    const std::size_t count = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    sig.samples.reserve(count);
    Rng rng(seed);
    double v = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        sig.samples.push_back(v);
        v += rng.normal() * volatility * dt;
        if (r_r == 0.0) {
            v = 0.0;
            continue;
        }
        // reflect into [-r_r, r_r]
        while (v > r_r || v < -r_r) {
            if (v > r_r) v = 2.0 * r_r - v;
            if (v < -r_r) v = -2.0 * r_r - v;
        }
    }
    return sig;
}

}  // namespace thermoflex
