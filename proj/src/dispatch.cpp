#include "thermoflex/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thermoflex/rng.hpp"

namespace thermoflex {

namespace {

// Everything about one building's tick reduces to affine functions of u.
struct AffineTerms {
    double s = 0.0;      // delta_r(u) = d - s*u, s = Nc (x_N + x_2N) >= 0
    double d = 0.0;      // natural drift Nc (alpha x_N - beta x_2N)
    double p = 0.0;      // x_N(t+1) + x_2N(t+1) = p + q*u
    double q = 0.0;
    double a1 = 0.0;     // downward set-point slack rate (Tset - Tmin)/(dt delta)
    double a2 = 0.0;     // upward slack rate (Tmax - Tset)/(dt delta)
    double alpha = 0.0;
    double beta = 0.0;
    double pop = 0.0;
    Interval box;        // control box used by the optimizer
    Interval box_rates;  // jump-rate and set-point limits only
};

AffineTerms make_affine(const BuildingSnapshot& b, double dt) {
    AffineTerms t;
    t.alpha = b.rates.alpha;
    t.beta = b.rates.beta;
    t.pop = b.params.population;
    t.s = t.pop * (b.x_n + b.x_2n);
    t.d = t.pop * (t.alpha * b.x_n - t.beta * b.x_2n);
    t.p = b.x_n + b.x_2n +
          dt * (t.alpha * (b.x_nm1 - b.x_n) + t.beta * (b.x_2nm1 - b.x_2n));
    t.q = dt * ((b.x_2nm1 - b.x_2n) - (b.x_nm1 - b.x_n));
    const double scale = dt * b.params.bin_width;
    t.a1 = (b.set_point - b.params.set_point_min()) / scale;
    t.a2 = (b.params.set_point_max() - b.set_point) / scale;
    t.box_rates = admissible_control_interval(b.params, b.rates, b.set_point, dt);
    t.box = t.box_rates;
    if (t.s > 1e-12) {
        // Keep consumption after one tick inside the sold band
        // [baseline - capacity, baseline + capacity].
        const double dr_hi = (b.baseline + b.capacity - b.output_now) / dt;
        const double dr_lo = (b.baseline - b.capacity - b.output_now) / dt;
        const double u_lo = (t.d - dr_hi) / t.s;
        const double u_hi = (t.d - dr_lo) / t.s;
        if (u_lo > t.box.hi) {
            t.box.lo = t.box.hi;  // already above the band: push down as hard as allowed
        } else if (u_hi < t.box.lo) {
            t.box.hi = t.box.lo;
        } else {
            t.box.lo = std::fmax(t.box.lo, u_lo);
            t.box.hi = std::fmin(t.box.hi, u_hi);
        }
    }
    return t;
}

double width_at(const AffineTerms& t, double u) {
    const double m1 = std::fmin(t.a1 + u, t.beta);
    const double m2 = std::fmin(t.a2 - u, t.alpha);
    return t.pop * (t.p + t.q * u) * (m1 + m2);
}

double objective_terms(const std::vector<AffineTerms>& terms, const std::vector<double>& us,
                       double delta_p, double penalty, double* p_spin_out) {
    double widths = 0.0;
    double dr_sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        widths += width_at(terms[i], us[i]);
        dr_sum += terms[i].d - terms[i].s * us[i];
    }
    const double p_spin = delta_p - dr_sum;
    if (p_spin_out != nullptr) *p_spin_out = p_spin;
    return widths - penalty * p_spin * p_spin;
}

double sum_squares(const std::vector<double>& us) {
    double acc = 0.0;
    for (double u : us) acc += u * u;
    return acc;
}

// Exact maximizer of the piecewise-quadratic single-coordinate objective.
double best_coordinate(const std::vector<AffineTerms>& terms, std::vector<double>& us,
                       std::size_t i, double delta_p, double penalty) {
    const AffineTerms& t = terms[i];
    // spin(u_i) = c0 + s_i u_i with the other coordinates held fixed
    double dr_others = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        if (j != i) dr_others += terms[j].d - terms[j].s * us[j];
    }
    const double c0 = delta_p - dr_others - t.d;

    double pts[4];
    int n_pts = 0;
    pts[n_pts++] = t.box.lo;
    const double k1 = t.beta - t.a1;   // kink of min(a1 + u, beta)
    const double k2 = t.a2 - t.alpha;  // kink of min(a2 - u, alpha)
    if (k1 > t.box.lo && k1 < t.box.hi) pts[n_pts++] = k1;
    if (k2 > t.box.lo && k2 < t.box.hi) pts[n_pts++] = k2;
    pts[n_pts++] = t.box.hi;
    std::sort(pts, pts + n_pts);

    auto local = [&](double u) {
        const double spin = c0 + t.s * u;
        return width_at(t, u) - penalty * spin * spin;
    };

    double best_u = us[i];
    double best_f = local(best_u);
    auto consider = [&](double u) {
        const double f = local(u);
        const double tol = 1e-12 * (1.0 + std::fabs(best_f));
        if (f > best_f + tol || (f > best_f - tol && u * u < best_u * best_u)) {
            best_f = f;
            best_u = u;
        }
    };

    for (int seg = 0; seg + 1 < n_pts; ++seg) {
        const double lo = pts[seg];
        const double hi = pts[seg + 1];
        consider(lo);
        consider(hi);
        if (hi - lo <= 0.0) continue;
        const double mid = 0.5 * (lo + hi);
        const double h = (t.a1 + mid < t.beta ? 1.0 : 0.0) + (t.a2 - mid < t.alpha ? -1.0 : 0.0);
        const double g = std::fmin(t.a1 + mid, t.beta) + std::fmin(t.a2 - mid, t.alpha) - h * mid;
        const double quad = t.pop * t.q * h - penalty * t.s * t.s;
        const double lin = t.pop * (t.p * h + t.q * g) - 2.0 * penalty * c0 * t.s;
        if (quad < 0.0) {
            const double vertex = -lin / (2.0 * quad);
            if (vertex > lo && vertex < hi) consider(vertex);
        }
    }
    us[i] = best_u;
    return best_f;
}

// Exact maximization along the ray us + t*dir, t in [0, t_max]. The objective
// is piecewise quadratic in t, so a three-point parabola fit per piece finds
// the interior maxima exactly. Clears the slow zigzag the spinning penalty
// induces on plain coordinate ascent.
double line_search(const std::vector<AffineTerms>& terms, std::vector<double>& us,
                   const std::vector<double>& dir, double delta_p, double penalty,
                   double current_obj) {
    const std::size_t m = terms.size();
    double t_max = 1e300;
    for (std::size_t i = 0; i < m; ++i) {
        if (dir[i] > 0.0) t_max = std::fmin(t_max, (terms[i].box.hi - us[i]) / dir[i]);
        if (dir[i] < 0.0) t_max = std::fmin(t_max, (terms[i].box.lo - us[i]) / dir[i]);
    }
    if (t_max <= 0.0 || t_max > 1e200) return current_obj;

    std::vector<double> knots{0.0, t_max};
    for (std::size_t i = 0; i < m; ++i) {
        if (dir[i] == 0.0) continue;
        const double k1 = (terms[i].beta - terms[i].a1 - us[i]) / dir[i];
        const double k2 = (terms[i].a2 - terms[i].alpha - us[i]) / dir[i];
        if (k1 > 0.0 && k1 < t_max) knots.push_back(k1);
        if (k2 > 0.0 && k2 < t_max) knots.push_back(k2);
    }
    std::sort(knots.begin(), knots.end());

    std::vector<double> probe(m);
    auto eval = [&](double t) {
        for (std::size_t i = 0; i < m; ++i) probe[i] = us[i] + t * dir[i];
        return objective_terms(terms, probe, delta_p, penalty, nullptr);
    };

    double best_t = 0.0;
    double best_f = current_obj;
    auto consider = [&](double t, double f) {
        if (f > best_f) {
            best_f = f;
            best_t = t;
        }
    };
    for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
        const double lo = knots[seg];
        const double hi = knots[seg + 1];
        if (hi - lo <= 1e-15) continue;
        const double mid = 0.5 * (lo + hi);
        const double f_lo = eval(lo);
        const double f_mid = eval(mid);
        const double f_hi = eval(hi);
        consider(lo, f_lo);
        consider(hi, f_hi);
        const double curvature = f_lo - 2.0 * f_mid + f_hi;
        if (curvature < 0.0) {
            const double h = 0.5 * (hi - lo);
            const double offset = h * (f_lo - f_hi) / (2.0 * curvature);
            const double t_v = mid + offset;
            if (t_v > lo && t_v < hi) consider(t_v, eval(t_v));
        }
    }
    if (best_t > 0.0) {
        for (std::size_t i = 0; i < m; ++i) {
            us[i] = terms[i].box.clamp(us[i] + best_t * dir[i]);
        }
    }
    return best_f;
}

DispatchSolution assemble(const DispatchProblem& problem, const std::vector<AffineTerms>& terms,
                          const std::vector<double>& us, double penalty, DispatchMethod method) {
    DispatchSolution sol;
    sol.method = method;
    sol.buildings.resize(terms.size());
    double dr_sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        BuildingDispatch& b = sol.buildings[i];
        b.u = us[i];
        b.delta_r = terms[i].d - terms[i].s * us[i];
        b.width = width_at(terms[i], us[i]);
        dr_sum += b.delta_r;
    }
    sol.p_spin = problem.delta_p - dr_sum;
    sol.objective = objective_terms(terms, us, problem.delta_p, penalty, nullptr);
    return sol;
}

void validate_problem(const DispatchProblem& problem) {
    if (problem.buildings.empty()) throw ConfigError("dispatch problem has no buildings");
    if (problem.dt <= 0.0) throw ConfigError("dispatch dt must be positive");
    for (const BuildingSnapshot& b : problem.buildings) {
        if (b.params.n_bins < 2) {
            throw ConfigError("dispatch snapshots need n_bins >= 2 (distinct x_{N-1} and x_N)");
        }
    }
}

double resolve_penalty(const DispatchProblem& problem) {
    return problem.penalty > 0.0 ? problem.penalty : default_penalty(problem);
}

}  // namespace

double capability_width(const BuildingSnapshot& b, double u, double dt) {
    return width_at(make_affine(b, dt), u);
}

Interval dispatch_control_box(const BuildingSnapshot& b, double dt) {
    return make_affine(b, dt).box;
}

double default_penalty(const DispatchProblem& problem) {
    double worst = 0.0;
    for (const BuildingSnapshot& b : problem.buildings) {
        const AffineTerms t = make_affine(b, problem.dt);
        const double dr_max = t.d - t.s * t.box_rates.lo;
        if (dr_max > worst) worst = dr_max;
    }
    const double denom = std::fmax(worst * worst, 1e-12);
    return 1e3 / denom;
}

double dispatch_objective(const DispatchProblem& problem, const std::vector<double>& us,
                          double* p_spin_out) {
    validate_problem(problem);
    std::vector<AffineTerms> terms;
    terms.reserve(problem.buildings.size());
    for (const BuildingSnapshot& b : problem.buildings) terms.push_back(make_affine(b, problem.dt));
    return objective_terms(terms, us, problem.delta_p, resolve_penalty(problem), p_spin_out);
}

DispatchSolution solve_dispatch(const DispatchProblem& problem) {
    validate_problem(problem);
    const double penalty = resolve_penalty(problem);
    const std::size_t m = problem.buildings.size();
    std::vector<AffineTerms> terms;
    terms.reserve(m);
    for (const BuildingSnapshot& b : problem.buildings) terms.push_back(make_affine(b, problem.dt));

    Rng rng(0x74f3a2c9d1e58b07ULL);
    std::vector<std::vector<double>> starts;
    std::vector<double> zero(m);
    for (std::size_t i = 0; i < m; ++i) zero[i] = terms[i].box.clamp(0.0);
    starts.push_back(zero);
    for (int k = 0; k < 8; ++k) {
        std::vector<double> us(m);
        for (std::size_t i = 0; i < m; ++i) us[i] = rng.uniform(terms[i].box.lo, terms[i].box.hi);
        starts.push_back(std::move(us));
    }

    bool have_best = false;
    std::vector<double> best_us;
    double best_obj = 0.0;
    for (std::vector<double>& us : starts) {
        double obj = objective_terms(terms, us, problem.delta_p, penalty, nullptr);
        bool converged = false;
        std::vector<double> dir(m);
        for (int sweep = 0; sweep < 500; ++sweep) {
            const std::vector<double> before = us;
            for (std::size_t i = 0; i < m; ++i) {
                best_coordinate(terms, us, i, problem.delta_p, penalty);
            }
            double next = objective_terms(terms, us, problem.delta_p, penalty, nullptr);
            bool moved = false;
            for (std::size_t i = 0; i < m; ++i) {
                dir[i] = us[i] - before[i];
                if (dir[i] != 0.0) moved = true;
            }
            if (moved && m > 1) {
                next = line_search(terms, us, dir, problem.delta_p, penalty, next);
            }
            if (next - obj < 1e-9) {
                obj = next;
                converged = true;
                break;
            }
            obj = next;
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "dispatch ascent did not converge; last objective " << obj << ", iterate (";
            for (std::size_t i = 0; i < m; ++i) msg << (i ? ", " : "") << us[i];
            msg << ")";
            throw SolverError(msg.str());
        }
        const double tol = 1e-9 * (1.0 + std::fabs(obj));
        if (!have_best || obj > best_obj + tol ||
            (obj > best_obj - tol && sum_squares(us) < sum_squares(best_us))) {
            have_best = true;
            best_obj = obj;
            best_us = us;
        }
    }
    return assemble(problem, terms, best_us, penalty, DispatchMethod::optimized);
}

DispatchSolution solve_dispatch_oracle(const DispatchProblem& problem, int grid_points) {
    validate_problem(problem);
    const std::size_t m = problem.buildings.size();
    if (m > 3) throw ConfigError("grid oracle refuses m > 3 (combinatorial blowup)");
    if (grid_points < 200) throw ConfigError("grid oracle needs >= 200 points per dimension");
    const double penalty = resolve_penalty(problem);
    std::vector<AffineTerms> terms;
    terms.reserve(m);
    for (const BuildingSnapshot& b : problem.buildings) terms.push_back(make_affine(b, problem.dt));

    std::vector<std::vector<double>> grids(m);
    for (std::size_t i = 0; i < m; ++i) {
        grids[i].resize(static_cast<std::size_t>(grid_points));
        const double lo = terms[i].box.lo;
        const double span = terms[i].box.width();
        for (int k = 0; k < grid_points; ++k) {
            grids[i][static_cast<std::size_t>(k)] = lo + span * k / (grid_points - 1);
        }
    }

    std::vector<double> us(m, 0.0);
    std::vector<double> best_us(m, 0.0);
    double best_obj = 0.0;
    bool have_best = false;
    auto consider = [&]() {
        const double obj = objective_terms(terms, us, problem.delta_p, penalty, nullptr);
        const double tol = 1e-12 * (1.0 + std::fabs(obj));
        if (!have_best || obj > best_obj + tol ||
            (obj > best_obj - tol && sum_squares(us) < sum_squares(best_us))) {
            have_best = true;
            best_obj = obj;
            best_us = us;
        }
    };
    if (m == 1) {
        for (double u0 : grids[0]) {
            us[0] = u0;
            consider();
        }
    } else if (m == 2) {
        for (double u0 : grids[0]) {
            us[0] = u0;
            for (double u1 : grids[1]) {
                us[1] = u1;
                consider();
            }
        }
    } else {
        for (double u0 : grids[0]) {
            us[0] = u0;
            for (double u1 : grids[1]) {
                us[1] = u1;
                for (double u2 : grids[2]) {
                    us[2] = u2;
                    consider();
                }
            }
        }
    }
    return assemble(problem, terms, best_us, penalty, DispatchMethod::oracle);
}

DispatchSolution proportional_dispatch(const DispatchProblem& problem) {
    validate_problem(problem);
    const double penalty = resolve_penalty(problem);
    const std::size_t m = problem.buildings.size();
    double cap_sum = 0.0;
    for (const BuildingSnapshot& b : problem.buildings) cap_sum += b.capacity;
    if (cap_sum <= 0.0) throw ParameterError("proportional dispatch needs positive total capacity");

    std::vector<AffineTerms> terms;
    terms.reserve(m);
    for (const BuildingSnapshot& b : problem.buildings) terms.push_back(make_affine(b, problem.dt));

    std::vector<double> us(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const AffineTerms& t = terms[i];
        const double share = problem.delta_p * problem.buildings[i].capacity / cap_sum;
        const double dr_max = t.d - t.s * t.box_rates.lo;
        const double dr_min = t.d - t.s * t.box_rates.hi;
        const double dr = std::fmin(std::fmax(share, dr_min), dr_max);
        us[i] = t.s > 1e-12 ? t.box_rates.clamp((t.d - dr) / t.s) : 0.0;
    }
    return assemble(problem, terms, us, penalty, DispatchMethod::proportional);
}

}  // namespace thermoflex
