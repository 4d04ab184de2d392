#include "thermoflex/capability.hpp"

namespace thermoflex {

double long_term_bound(const BuildingParams& p) {
    return p.population * p.tau * p.set_band_width / (2.0 * p.t_gain);
}

Interval short_term_bounds(const StateVector& x, const BuildingParams& p, const RateSet& r) {
    (void)r;
    const std::size_t dim = x.size();
    const std::size_t n = dim / 2;
    const double scale = p.n_bins * p.population * p.t_gain / (p.tau * p.band_width);
    Interval iv;
    iv.lo = -x[dim - 1] * scale;
    iv.hi = x[n - 1] * scale;
    return iv;
}

Interval provision_thresholds(const StateVector& x, double current_set_point,
                              const BuildingParams& p, const RateSet& r, double dt) {
    const Interval u_iv = admissible_control_interval(p, r, current_set_point, dt);
    // The ramp is decreasing in u, so the interval endpoints swap.
    Interval iv;
    iv.hi = output_rate(x, u_iv.lo, p.population, r);
    iv.lo = output_rate(x, u_iv.hi, p.population, r);
    return iv;
}

double spinning_reserve(double delta_p, double dr_min, double dr_max) {
    if (dr_min > dr_max) throw ParameterError("dr_min must not exceed dr_max");
    if (delta_p > dr_max) return delta_p - dr_max;
    if (delta_p < dr_min) return delta_p - dr_min;
    return 0.0;
}

double qualification_limit(const BuildingParams& p, double k_minutes) {
    if (k_minutes <= 0.0 || k_minutes > 5.0) {
        throw ParameterError("rate-of-response window k must be in (0, 5] minutes");
    }
    // The qualification signal accumulates up to ten capacity-minutes, hence
    // the factor 20 against the half-band bound.
    const double long_term = p.population * p.tau * p.set_band_width / (20.0 * p.t_gain);
    const double slower_half = p.t_on > p.t_off ? p.t_on : p.t_off;
    const double short_term = k_minutes * p.population / slower_half;
    return long_term < short_term ? long_term : short_term;
}

CapabilityReport capability_report(const StateVector& x, double current_set_point,
                                   const BuildingParams& p, const RateSet& r, double dt,
                                   double k_minutes) {
    CapabilityReport rep;
    rep.s_max = long_term_bound(p);
    const Interval ramp = short_term_bounds(x, p, r);
    rep.ramp_lo = ramp.lo;
    rep.ramp_hi = ramp.hi;
    const Interval thr = provision_thresholds(x, current_set_point, p, r, dt);
    rep.dr_min = thr.lo;
    rep.dr_max = thr.hi;
    rep.r_qual = qualification_limit(p, k_minutes);
    return rep;
}

}  // namespace thermoflex
