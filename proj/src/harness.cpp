#include "thermoflex/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "thermoflex/log.hpp"
#include "thermoflex/observer.hpp"
#include "thermoflex/tracking_controller.hpp"

#include "json.hpp"

namespace thermoflex {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double l2_error(const StateVector& a, const StateVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

struct BuildingRuntime {
    const BuildingSpec* spec = nullptr;
    RateSet rates;
    double baseline = 0.0;
    StateVector x;
    double t_set = 0.0;
    std::optional<Observer> observer;
    double level = 0.0;
    double s_accum = 0.0;
};

BuildingRuntime make_runtime(const BuildingSpec& spec) {
    BuildingRuntime rt;
    rt.spec = &spec;
    rt.rates = derive_rates(spec.params);
    rt.baseline = spec.baseline(rt.rates);
    rt.x = steady_state(rt.rates, spec.params.n_bins);
    rt.t_set = spec.params.set_point;
    if (spec.observer.enabled) {
        ObserverConfig cfg;
        cfg.gamma = spec.observer.gamma;
        cfg.margin = spec.observer.margin;
        rt.observer.emplace(spec.params, rt.rates, cfg);
    }
    return rt;
}

}  // namespace

RegulationSignal make_signal(const Scenario& sc) {
    double cap_sum = 0.0;
    double base_sum = 0.0;
    for (const BuildingSpec& b : sc.buildings) {
        cap_sum += b.r_r;
        base_sum += b.baseline(derive_rates(b.params));
    }
    const double r_r = sc.signal.r_r >= 0.0 ? sc.signal.r_r : cap_sum;
    const double r_b = sc.signal.r_b >= 0.0 ? sc.signal.r_b : base_sum;
    switch (sc.signal.kind) {
        case SignalKind::csv: {
            std::string path = sc.signal.path;
            if (!path.empty() && path.front() != '/' && !sc.base_dir.empty()) {
                path = sc.base_dir + "/" + path;
            }
            return ingest_signal(path, sc.dt, r_r, r_b);
        }
        case SignalKind::synthetic:
            return generate_synthetic(sc.seed, r_r, sc.duration, sc.dt, sc.signal.volatility, r_b);
        case SignalKind::t50: {
            const T50Profile profile =
                sc.signal.profile.knots.empty() ? default_t50_profile() : sc.signal.profile;
            return generate_t50(r_r, profile, sc.dt, r_b);
        }
    }
    throw ConfigError("unreachable signal kind");
}

SimResult run_simulation(const Scenario& sc) {
    if (sc.buildings.empty()) throw ConfigError("scenario has no buildings");
    const std::size_t n_ticks = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
    if (n_ticks == 0) throw ConfigError("scenario duration shorter than one tick");

    const RegulationSignal signal = make_signal(sc);
    std::vector<BuildingRuntime> fleet;
    fleet.reserve(sc.buildings.size());
    for (const BuildingSpec& b : sc.buildings) fleet.push_back(make_runtime(b));
    const std::size_t m = fleet.size();

    SimResult result;
    SimTrace& trace = result.trace;
    trace.dt = sc.dt;
    for (const BuildingRuntime& rt : fleet) {
        trace.names.push_back(rt.spec->name);
        trace.baselines.push_back(rt.baseline);
    }
    trace.ticks.reserve(n_ticks);
    trace.iso.reserve(n_ticks);
    trace.signal.reserve(n_ticks);

    for (std::size_t tick = 0; tick < n_ticks; ++tick) {
        const double r_now = signal.at(tick);
        const double r_next = signal.at(tick + 1);
        const double delta_p = signal_derivative(r_now, r_next, sc.dt);
        trace.signal.push_back(r_now);

        // Stage 1: every building publishes its capability upward.
        DispatchProblem problem;
        problem.delta_p = delta_p;
        problem.penalty = sc.penalty;
        problem.dt = sc.dt;
        problem.buildings.resize(m);
        std::vector<Interval> thresholds(m);
        for (std::size_t i = 0; i < m; ++i) {
            BuildingRuntime& rt = fleet[i];
            const bool use_estimate = rt.observer.has_value() && sc.controller_uses_estimate;
            const StateVector& view = use_estimate ? rt.observer->estimate() : rt.x;
            const std::size_t dim = view.size();
            const std::size_t n = dim / 2;
            BuildingSnapshot& snap = problem.buildings[i];
            snap.params = rt.spec->params;
            snap.rates = rt.rates;
            snap.x_nm1 = view[n - 2];
            snap.x_n = view[n - 1];
            snap.x_2nm1 = view[dim - 2];
            snap.x_2n = view[dim - 1];
            snap.set_point = rt.t_set;
            snap.baseline = rt.baseline;
            snap.capacity = rt.spec->r_r;
            snap.output_now = output(rt.x, rt.spec->params.population);
            try {
                thresholds[i] =
                    provision_thresholds(view, rt.t_set, rt.spec->params, rt.rates, sc.dt);
            } catch (const Error& e) {
                std::ostringstream msg;
                msg << "tick " << tick << ", building " << rt.spec->name << ": " << e.what();
                throw SolverError(msg.str());
            }
        }

        // Stage 2: the operator dispatches the demanded ramp.
        DispatchSolution sol;
        try {
            sol = sc.dispatch_mode == DispatchMode::optimized ? solve_dispatch(problem)
                                                              : proportional_dispatch(problem);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "tick " << tick << ": dispatch failed: " << e.what();
            throw SolverError(msg.str());
        }
        trace.iso.push_back({delta_p, sol.p_spin, sol.objective});

        // Stage 3: every building tracks its share and advances one tick.
        std::vector<BuildingTick> row(m);
        for (std::size_t i = 0; i < m; ++i) {
            BuildingRuntime& rt = fleet[i];
            const BuildingSpec& spec = *rt.spec;
            const bool use_estimate = rt.observer.has_value() && sc.controller_uses_estimate;
            const StateVector& view = use_estimate ? rt.observer->estimate() : rt.x;
            const double delta_r = sol.buildings[i].delta_r;

            const Interval admissible =
                admissible_control_interval(spec.params, rt.rates, rt.t_set, sc.dt);
            ControlOutcome outcome = ramp_control(view, delta_r, spec.params.population, rt.rates,
                                                  spec.controller.x_floor, admissible);
            double u = outcome.u;
            if (rt.observer.has_value()) {
                const double restricted = rt.observer->restrict_control(u);
                if (restricted != u) outcome.saturated = true;
                u = restricted;
            }

            const double y = output(rt.x, spec.params.population);
            StepInfo info;
            try {
                step_in_place(rt.x, u, sc.dt, rt.rates, &info);
                if (rt.observer.has_value()) rt.observer->step(u, y, sc.dt);
            } catch (const Error& e) {
                std::ostringstream msg;
                msg << "tick " << tick << ", building " << spec.name << ": " << e.what();
                throw SolverError(msg.str());
            }
            if (info.pre_clamp_min < trace.worst_pre_clamp) {
                trace.worst_pre_clamp = info.pre_clamp_min;
            }
            const double sum_err = std::fabs(info.pre_renorm_sum - 1.0);
            if (sum_err > trace.worst_sum_err) trace.worst_sum_err = sum_err;

            rt.t_set += u * sc.dt * spec.params.bin_width;
            // numerical guard: the admissible clamp keeps this inside the band
            rt.t_set = std::fmin(std::fmax(rt.t_set, spec.params.set_point_min()),
                                 spec.params.set_point_max());
            rt.level += delta_r * sc.dt;
            rt.s_accum += rt.level * sc.dt;

            BuildingTick& bt = row[i];
            bt.cx = y;
            bt.u = u;
            bt.delta_r = delta_r;
            bt.dr_min = thresholds[i].lo;
            bt.dr_max = thresholds[i].hi;
            bt.t_set = rt.t_set;
            bt.s_accum = rt.s_accum;
            bt.sat = outcome.saturated;
            bt.sing = outcome.singular;
            const std::size_t dim = rt.x.size();
            bt.x_n = rt.x[dim / 2 - 1];
            bt.x_2n = rt.x[dim - 1];
            double mass = 0.0;
            for (double v : rt.x) mass += v;
            bt.mass_sum = mass;
            bt.level = rt.level;
            if (rt.observer.has_value()) {
                bt.err_norm = l2_error(rt.x, rt.observer->estimate());
                bt.epsilon = rt.observer->epsilon();
            }
        }
        trace.ticks.push_back(std::move(row));
    }
    result.stats = summarize(trace);
    return result;
}

StatsTable summarize(const SimTrace& trace) {
    if (trace.iso.empty()) throw ConfigError("cannot summarize an empty trace");
    StatsTable s;
    s.max = trace.iso.front().p_spin;
    s.min = trace.iso.front().p_spin;
    double sum = 0.0;
    for (const IsoTick& t : trace.iso) {
        s.total += std::fabs(t.p_spin) * trace.dt;
        sum += t.p_spin;
        if (t.p_spin > s.max) s.max = t.p_spin;
        if (t.p_spin < s.min) s.min = t.p_spin;
    }
    const double n = static_cast<double>(trace.iso.size());
    s.mean = sum / n;
    double var = 0.0;
    for (const IsoTick& t : trace.iso) {
        const double d = t.p_spin - s.mean;
        var += d * d;
    }
    s.std_dev = std::sqrt(var / n);
    return s;
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    out << "tick,t_min,building,cx,u,delta_r,dr_min,dr_max,t_set,s_accum,sat,sing\n";
    for (std::size_t tick = 0; tick < trace.size(); ++tick) {
        const std::string t_min = fmt9(static_cast<double>(tick) * trace.dt);
        const std::vector<BuildingTick>& row = trace.ticks[tick];
        for (std::size_t i = 0; i < row.size(); ++i) {
            const BuildingTick& b = row[i];
            out << tick << ',' << t_min << ',' << i << ',' << fmt9(b.cx) << ',' << fmt9(b.u) << ','
                << fmt9(b.delta_r) << ',' << fmt9(b.dr_min) << ',' << fmt9(b.dr_max) << ','
                << fmt9(b.t_set) << ',' << fmt9(b.s_accum) << ',' << (b.sat ? 1 : 0) << ','
                << (b.sing ? 1 : 0) << '\n';
        }
        const IsoTick& iso = trace.iso[tick];
        out << tick << ',' << t_min << ",ISO," << fmt9(iso.delta_p) << ',' << fmt9(iso.p_spin)
            << ',' << fmt9(iso.objective) << ",,,,,,\n";
    }
}

std::string stats_json(const StatsTable& stats) {
    nlohmann::json j;
    j["total"] = stats.total;
    j["mean"] = stats.mean;
    j["std"] = stats.std_dev;
    j["max"] = stats.max;
    j["min"] = stats.min;
    return j.dump(2) + "\n";
}

StatsTable stats_from_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace file: " + path);

    SimTrace trace;
    std::vector<double> t_of_tick;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 12) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected 12 columns";
            throw ParseError(msg.str());
        }
        if (fields[2] != "ISO") continue;
        IsoTick iso;
        iso.delta_p = std::strtod(fields[3].c_str(), nullptr);
        iso.p_spin = std::strtod(fields[4].c_str(), nullptr);
        iso.objective = std::strtod(fields[5].c_str(), nullptr);
        trace.iso.push_back(iso);
        t_of_tick.push_back(std::strtod(fields[1].c_str(), nullptr));
    }
    if (trace.iso.size() < 2) throw ParseError("trace has fewer than two ticks: " + path);
    trace.dt = t_of_tick[1] - t_of_tick[0];
    return summarize(trace);
}

void write_plot_data(const SimTrace& trace, std::ostream& out) {
    out << "t_min,building,series,value\n";
    for (std::size_t tick = 0; tick < trace.size(); ++tick) {
        const std::string t_min = fmt9(static_cast<double>(tick) * trace.dt);
        const std::vector<BuildingTick>& row = trace.ticks[tick];
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string& name = trace.names[i];
            const BuildingTick& b = row[i];
            const double base = i < trace.baselines.size() ? trace.baselines[i] : 0.0;
            // level is post-update; cx is measured at the tick start
            const double target = base + b.level - b.delta_r * trace.dt;
            out << t_min << ',' << name << ",cx," << fmt9(b.cx) << '\n';
            out << t_min << ',' << name << ",target," << fmt9(target) << '\n';
            out << t_min << ',' << name << ",u," << fmt9(b.u) << '\n';
            out << t_min << ',' << name << ",t_set," << fmt9(b.t_set) << '\n';
            if (b.err_norm > 0.0) {
                out << t_min << ',' << name << ",err_norm," << fmt9(b.err_norm) << '\n';
            }
        }
        out << t_min << ",ISO,delta_p," << fmt9(trace.iso[tick].delta_p) << '\n';
        out << t_min << ",ISO,p_spin," << fmt9(trace.iso[tick].p_spin) << '\n';
        if (tick < trace.signal.size()) {
            out << t_min << ",ISO,signal," << fmt9(trace.signal[tick]) << '\n';
        }
    }
}

T50Result run_t50(const BuildingSpec& spec, double r_r, double dt, const T50Profile& profile,
                  double tolerance) {
    const RateSet rates = derive_rates(spec.params);
    if (dt * (rates.alpha + rates.beta) >= 0.5) {
        throw ConfigError("tick violates dt*(alpha+beta) < 0.5");
    }
    const double baseline = spec.baseline(rates);
    const RegulationSignal sig = generate_t50(r_r, profile, dt, baseline);

    T50Result res;
    res.r_r = r_r;
    res.tolerance = tolerance;
    const double tol_abs = tolerance * r_r + 1e-9 * std::fmax(spec.params.population, 1.0);

    // Hold windows: profile segments pinned at the +-1 fraction.
    for (std::size_t i = 0; i + 1 < profile.knots.size(); ++i) {
        const auto& [ta, fa] = profile.knots[i];
        const auto& [tb, fb] = profile.knots[i + 1];
        if (fa == fb && std::fabs(fa) == 1.0) {
            T50Window w;
            w.t_begin = ta;
            w.t_end = tb;
            w.target = baseline + fa * r_r;
            res.windows.push_back(w);
        }
    }

    StateVector x = steady_state(rates, spec.params.n_bins);
    double t_set = spec.params.set_point;
    const std::size_t n_ticks = sig.samples.size();
    res.series.reserve(n_ticks);
    for (std::size_t k = 0; k < n_ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double y = output(x, spec.params.population);
        const double target = baseline + sig.at(k);
        res.series.push_back({t, target, y, t_set});
        const double err = y - target;
        if (std::fabs(err) > res.max_tracking_err) res.max_tracking_err = std::fabs(err);
        for (T50Window& w : res.windows) {
            if (t >= w.t_begin - 1e-9 && t <= w.t_end + 1e-9) {
                const double werr = std::fabs(y - w.target);
                if (t <= w.t_begin + 0.5 * dt) w.err_at_start = werr;
                if (werr > w.max_abs_err) w.max_abs_err = werr;
            }
        }
        if (k + 1 == n_ticks) break;
        const double target_dot = signal_derivative(sig.at(k), sig.at(k + 1), dt);
        const Interval admissible =
            admissible_control_interval(spec.params, rates, t_set, dt);
        const ControlOutcome outcome = control_law(x, target, target_dot,
                                                   spec.params.population, rates,
                                                   spec.controller, admissible);
        if (outcome.saturated) res.any_saturation = true;
        step_in_place(x, outcome.u, dt, rates);
        t_set += outcome.u * dt * spec.params.bin_width;
        t_set = std::fmin(std::fmax(t_set, spec.params.set_point_min()),
                          spec.params.set_point_max());
    }

    res.pass = true;
    for (T50Window& w : res.windows) {
        w.rate_ok = w.err_at_start <= tol_abs;
        w.sustain_ok = w.max_abs_err <= tol_abs;
        if (!w.rate_ok || !w.sustain_ok) res.pass = false;
    }
    return res;
}

T50Result run_t50(const BuildingSpec& spec, double r_r, double dt, double tolerance) {
    return run_t50(spec, r_r, dt, default_t50_profile(), tolerance);
}

void write_t50_plot_data(const T50Result& result, std::ostream& out) {
    out << "t_min,series,value\n";
    for (const T50Sample& s : result.series) {
        const std::string t_min = fmt9(s.t_min);
        out << t_min << ",target," << fmt9(s.target) << '\n';
        out << t_min << ",cx," << fmt9(s.cx) << '\n';
        out << t_min << ",t_set," << fmt9(s.t_set) << '\n';
    }
}

double sweep_t50_boundary(const BuildingSpec& spec, double lo, double hi, int steps, double dt,
                          double tolerance) {
    if (steps < 2) throw ConfigError("sweep needs at least two steps");
    if (hi <= lo) throw ConfigError("sweep range must be increasing");
    double last_pass = -1.0;
    double first_fail = -1.0;
    for (int k = 0; k < steps; ++k) {
        const double r = lo + (hi - lo) * k / (steps - 1);
        const bool pass = run_t50(spec, r, dt, tolerance).pass;
        if (pass) {
            last_pass = r;
        } else {
            first_fail = r;
            break;
        }
    }
    if (last_pass < 0.0) return lo;   // fails everywhere in range
    if (first_fail < 0.0) return hi;  // passes everywhere in range
    for (int iter = 0; iter < 20; ++iter) {
        const double mid = 0.5 * (last_pass + first_fail);
        if (run_t50(spec, mid, dt, tolerance).pass) {
            last_pass = mid;
        } else {
            first_fail = mid;
        }
    }
    return 0.5 * (last_pass + first_fail);
}

}  // namespace thermoflex
